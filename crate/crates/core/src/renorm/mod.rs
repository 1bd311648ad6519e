//! Counter-rotating-term renormalizations of the level spacing.
//!
//! Both shifts are single spectral integrals:
//! Ω₁ = Ω + ∫ G(ω)/(ω+Ω) dω and Ω′ = Ω − 2Ω ∫ G(ω)/(ω+Ω)² dω.

mod incomplete_gamma;

use std::sync::OnceLock;

use statrs::function::gamma::gamma;

use crate::error::{Result, ZenoError};
use crate::quad::{integrate_to_infinity, Tolerance};
use crate::spectra::{OhmicParams, Spectrum};

pub use incomplete_gamma::upper_incomplete_gamma;

/// Tolerance for shift integrals. Tighter than the 1e-10 the shifts need
/// because Ω′ enters rate differences of order 1e-8.
const SHIFT_TOL: Tolerance = Tolerance::relative(1e-12);

/// Bare spacing Ω plus a spectrum. Ω₁ and Ω′ are computed on first use and
/// cached; the type is `Sync`, so a shared model can be swept concurrently.
#[derive(Debug, Clone)]
pub struct AtomBathModel {
    omega0: f64,
    spectrum: Spectrum,
    omega1: OnceLock<Result<f64>>,
    omega_prime: OnceLock<Result<f64>>,
}

impl AtomBathModel {
    pub fn new(omega0: f64, spectrum: Spectrum) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(ZenoError::Invalid(format!("Omega must be positive, got {omega0}")));
        }
        Ok(Self {
            omega0,
            spectrum,
            omega1: OnceLock::new(),
            omega_prime: OnceLock::new(),
        })
    }

    /// Reduced units, Ω = 1.
    pub fn reduced(spectrum: Spectrum) -> Self {
        Self::new(1.0, spectrum).expect("unit spacing is valid")
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn omega1(&self) -> Result<f64> {
        self.omega1.get_or_init(|| compute_omega1(self)).clone()
    }

    pub fn omega_prime(&self) -> Result<f64> {
        self.omega_prime.get_or_init(|| compute_omega_prime(self)).clone()
    }

    /// Replaces the cached Ω′, e.g. to force Ω′ = Ω in checks.
    pub fn with_omega_prime(self, omega_prime: f64) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(Ok(omega_prime));
        Self {
            omega_prime: cell,
            ..self
        }
    }

    pub fn coupling_modifier(&self) -> CouplingModifier {
        CouplingModifier {
            omega0: self.omega0,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.spectrum.features();
        v.push(self.omega0);
        v.sort_by(f64::total_cmp);
        v
    }
}

/// g_k → g′_k = 2Ω/(ω_k+Ω)·g_k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingModifier {
    omega0: f64,
}

impl CouplingModifier {
    pub fn new(omega0: f64) -> Self {
        Self { omega0 }
    }

    pub fn factor(&self, omega: f64) -> f64 {
        2.0 * self.omega0 / (omega + self.omega0)
    }
}

/// Ω₁ = Ω + ∫₀^∞ G(ω)/(ω+Ω) dω.
pub fn compute_omega1(model: &AtomBathModel) -> Result<f64> {
    let spec = model.spectrum();
    if spec.is_zero() {
        return Ok(model.omega0);
    }
    let w0 = model.omega0;
    let shift = integrate_to_infinity(
        |w| spec.value(w) / (w + w0),
        0.0,
        spec.cutoff().max(w0),
        &model.breakpoints(),
        SHIFT_TOL,
    )
    .map_err(ZenoError::integrability("approach-I level shift"))?;
    Ok(w0 + shift.value)
}

/// Ω′ = Ω − 2Ω ∫₀^∞ G(ω)/(ω+Ω)² dω.
pub fn compute_omega_prime(model: &AtomBathModel) -> Result<f64> {
    let spec = model.spectrum();
    if spec.is_zero() {
        return Ok(model.omega0);
    }
    let w0 = model.omega0;
    let integral = integrate_to_infinity(
        |w| spec.value(w) / (w + w0).powi(2),
        0.0,
        spec.cutoff().max(w0),
        &model.breakpoints(),
        SHIFT_TOL,
    )
    .map_err(ZenoError::integrability("approach-II level shift"))?;
    Ok(w0 - 2.0 * w0 * integral.value)
}

/// Ω₁ for an Ohmic-family spectrum in closed form,
/// Ω + A ω_c^{1−s} Ω^s Γ(1+s) e^{Ω/ω_c} Γ(−s, Ω/ω_c).
///
/// The factor ω_c^{1−s} comes from the spectrum itself; without it the result
/// has the wrong dimension and disagrees with quadrature whenever s ≠ 1.
pub fn compute_omega1_closed_form(params: &OhmicParams, omega0: f64) -> Result<f64> {
    let OhmicParams {
        amplitude,
        exponent: s,
        omega_c,
    } = *params;
    if !(s.is_finite() && s > 0.0) {
        return Err(ZenoError::Domain(format!("closed form needs s > 0, got {s}")));
    }
    if !(omega0 > 0.0 && omega_c > 0.0) {
        return Err(ZenoError::Domain(format!(
            "closed form needs Omega/omega_c > 0, got {omega0}/{omega_c}"
        )));
    }
    if amplitude == 0.0 {
        return Ok(omega0);
    }
    let z = omega0 / omega_c;
    // A ω_c z^s = A ω_c^{1−s} Ω^s
    let shift = amplitude
        * omega_c
        * z.powf(s)
        * gamma(1.0 + s)
        * z.exp()
        * upper_incomplete_gamma(-s, z)?;
    Ok(omega0 + shift)
}

/// ΔΩ(A, s) = Ω₁ − sω_c on a grid; rows follow `s_grid`, columns `a_grid`.
pub fn delta_omega_map(s_grid: &[f64], a_grid: &[f64], omega_c: f64) -> Result<Vec<Vec<f64>>> {
    if s_grid.is_empty() || a_grid.is_empty() {
        return Err(ZenoError::Invalid("delta-omega grids must be non-empty".into()));
    }
    if !(omega_c.is_finite() && omega_c > 0.0) {
        return Err(ZenoError::Invalid(format!("omega_c must be positive, got {omega_c}")));
    }
    s_grid
        .iter()
        .map(|&s| {
            // Ω₁ − Ω is linear in A, so one integral per s suffices.
            let unit = AtomBathModel::reduced(Spectrum::ohmic(OhmicParams::new(1.0, s, omega_c)?));
            let per_amplitude = unit.omega1()? - 1.0;
            a_grid
                .iter()
                .map(|&a| {
                    OhmicParams::new(a, s, omega_c)?;
                    Ok(1.0 + a * per_amplitude - s * omega_c)
                })
                .collect()
        })
        .collect()
}
