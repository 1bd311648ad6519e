//! Interacting spectral densities G(ω) and their approach-II modification.
//!
//! Frequencies are dimensionless multiples of the bare level spacing Ω. The
//! physical value of Ω, when known, is carried along as `omega_scale` (rad/s)
//! for SI reporting only.

mod tabulated;

use serde::Serialize;

use crate::error::{Result, ZenoError};
use crate::quad::{integrate_to_infinity, Tolerance};
use crate::renorm::AtomBathModel;

pub use tabulated::TabulatedSpectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HydrogenParams {
    pub eta: f64,
    pub omega_c: f64,
}

impl HydrogenParams {
    pub fn new(eta: f64, omega_c: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(ZenoError::Invalid(format!("eta must be positive, got {eta}")));
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(ZenoError::Invalid(format!("omega_c must be positive, got {omega_c}")));
        }
        Ok(Self { eta, omega_c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OhmicParams {
    #[serde(rename = "A")]
    pub amplitude: f64,
    #[serde(rename = "s")]
    pub exponent: f64,
    pub omega_c: f64,
}

impl OhmicParams {
    pub fn new(amplitude: f64, exponent: f64, omega_c: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(ZenoError::Invalid(format!("A must be >= 0, got {amplitude}")));
        }
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(ZenoError::Invalid(format!("s must be positive, got {exponent}")));
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(ZenoError::Invalid(format!("omega_c must be positive, got {omega_c}")));
        }
        Ok(Self {
            amplitude,
            exponent,
            omega_c,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    /// ηω / (1 + (ω/ω_c)²)⁴
    Hydrogen2p1s(HydrogenParams),
    /// ηω (1 + 2(ω/ω_c)²)² / (1 + (ω/ω_c)²)⁶
    Hydrogen3p1s(HydrogenParams),
    /// A ω_c^{1−s} ω^s e^{−ω/ω_c}
    OhmicFamily(OhmicParams),
    Tabulated(TabulatedSpectrum),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
    omega_scale: Option<f64>,
}

impl Spectrum {
    pub fn new(kind: SpectrumKind) -> Self {
        Self {
            kind,
            omega_scale: None,
        }
    }

    pub fn hydrogen_2p1s(params: HydrogenParams) -> Self {
        Self::new(SpectrumKind::Hydrogen2p1s(params))
    }

    pub fn hydrogen_3p1s(params: HydrogenParams) -> Self {
        Self::new(SpectrumKind::Hydrogen3p1s(params))
    }

    pub fn ohmic(params: OhmicParams) -> Self {
        Self::new(SpectrumKind::OhmicFamily(params))
    }

    /// The zero spectrum, written as an Ohmic spectrum with A = 0.
    pub fn zero() -> Self {
        Self::ohmic(OhmicParams {
            amplitude: 0.0,
            exponent: 1.0,
            omega_c: 1.0,
        })
    }

    /// Records the physical value of Ω in rad/s.
    pub fn with_omega_scale(mut self, omega_scale: f64) -> Result<Self> {
        if !(omega_scale.is_finite() && omega_scale > 0.0) {
            return Err(ZenoError::Invalid(format!(
                "omega_scale must be positive, got {omega_scale}"
            )));
        }
        self.omega_scale = Some(omega_scale);
        Ok(self)
    }

    pub fn kind(&self) -> &SpectrumKind {
        &self.kind
    }

    pub fn omega_scale(&self) -> Option<f64> {
        self.omega_scale
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SpectrumKind::Hydrogen2p1s(_) => "hydrogen-2p1s",
            SpectrumKind::Hydrogen3p1s(_) => "hydrogen-3p1s",
            SpectrumKind::OhmicFamily(_) => "ohmic",
            SpectrumKind::Tabulated(_) => "tabulated",
        }
    }

    /// True when G vanishes identically.
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            SpectrumKind::OhmicFamily(p) => p.amplitude == 0.0,
            SpectrumKind::Tabulated(t) => t.is_zero(),
            _ => false,
        }
    }

    /// The characteristic frequency of the spectrum: ω_c for closed forms,
    /// the last knot for tabulated data.
    pub fn cutoff(&self) -> f64 {
        match &self.kind {
            SpectrumKind::Hydrogen2p1s(p) | SpectrumKind::Hydrogen3p1s(p) => p.omega_c,
            SpectrumKind::OhmicFamily(p) => p.omega_c,
            SpectrumKind::Tabulated(t) => t.last_knot(),
        }
    }

    /// Frequencies where G changes character, used as quadrature breakpoints.
    pub fn features(&self) -> Vec<f64> {
        match &self.kind {
            SpectrumKind::Hydrogen2p1s(p) | SpectrumKind::Hydrogen3p1s(p) => {
                vec![p.omega_c / 7f64.sqrt(), p.omega_c, 3.0 * p.omega_c]
            }
            SpectrumKind::OhmicFamily(p) => {
                let peak = p.exponent * p.omega_c;
                let mut v = vec![p.omega_c];
                if peak != p.omega_c {
                    v.push(peak);
                }
                v
            }
            SpectrumKind::Tabulated(t) => t.features(),
        }
    }

    /// G(ω) without input checks; zero for ω < 0. Used inside quadrature.
    pub fn value(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            SpectrumKind::Hydrogen2p1s(p) => {
                let x2 = (omega / p.omega_c).powi(2);
                p.eta * omega / (1.0 + x2).powi(4)
            }
            SpectrumKind::Hydrogen3p1s(p) => {
                let x2 = (omega / p.omega_c).powi(2);
                p.eta * omega * (1.0 + 2.0 * x2).powi(2) / (1.0 + x2).powi(6)
            }
            SpectrumKind::OhmicFamily(p) => {
                if p.amplitude == 0.0 {
                    return 0.0;
                }
                let x = omega / p.omega_c;
                p.amplitude * p.omega_c * (p.exponent * x.ln() - x).exp()
            }
            SpectrumKind::Tabulated(t) => t.eval(omega),
        }
    }
}

/// G(ω), exactly zero for ω < 0.
pub fn eval_spectrum(spec: &Spectrum, omega: f64) -> Result<f64> {
    if !omega.is_finite() {
        return Err(ZenoError::Domain(format!("spectrum evaluated at {omega}")));
    }
    Ok(spec.value(omega))
}

/// f(ω) = ((2Ω + ω − Ω′)/(ω + Ω))², the approach-II spectral factor.
pub fn modification_factor(omega: f64, omega0: f64, omega_prime: f64) -> Result<f64> {
    if !omega.is_finite() {
        return Err(ZenoError::Domain(format!("modification factor at {omega}")));
    }
    let denom = omega + omega0;
    if denom == 0.0 {
        return Err(ZenoError::Domain(format!(
            "modification factor has a pole at omega = -Omega = {omega}"
        )));
    }
    let r = (2.0 * omega0 + omega - omega_prime) / denom;
    Ok(r * r)
}

/// G′(ω) = f(ω)·G(ω).
pub fn eval_modified_spectrum(spec: &Spectrum, omega: f64, model: &AtomBathModel) -> Result<f64> {
    let omega_prime = model.omega_prime()?;
    let f = modification_factor(omega, model.omega0(), omega_prime)?;
    Ok(f * eval_spectrum(spec, omega)?)
}

/// ∫₀^∞ G(ω) dω to relative tolerance 1e-10.
pub fn spectrum_total_weight(spec: &Spectrum) -> Result<f64> {
    if spec.is_zero() {
        return Ok(0.0);
    }
    integrate_to_infinity(
        |w| spec.value(w),
        0.0,
        spec.cutoff(),
        &spec.features(),
        Tolerance::relative(1e-10),
    )
    .map(|i| i.value)
    .map_err(ZenoError::integrability("spectral weight"))
}

/// Named model presets in reduced units.
pub mod presets {
    use super::*;

    /// Hydrogen amplitude η for both transitions.
    pub const HYDROGEN_ETA: f64 = 6.435e-9;
    /// 2p-1s cutoff ω_c/Ω.
    pub const HYDROGEN_2P1S_CUTOFF: f64 = 550.0;
    /// 2p-1s transition frequency in rad/s.
    pub const HYDROGEN_2P1S_OMEGA: f64 = 1.55e16;
    /// 2p-1s cutoff in rad/s.
    pub const HYDROGEN_2P1S_CUTOFF_RAD_S: f64 = 8.491e18;

    /// 3p-1s cutoff ω_c′/Ω used by the preset.
    ///
    /// The tabulated pair (η′ = 1.455e-9, ω_c′/Ω = 412) gives a level shift
    /// of 3.1e-7, about four times below the recorded 1.27e-6. Keeping η and
    /// solving for the cutoff that reproduces 1.27e-6 gives 320.40; the same
    /// pair then predicts |Ω′−Ω|/Ω = 5.33e-8 with no further fitting.
    pub const HYDROGEN_3P1S_CUTOFF: f64 = 320.40;
    /// Literal 3p-1s amplitude η′.
    pub const HYDROGEN_3P1S_ETA_LITERAL: f64 = 1.455e-9;
    /// Literal 3p-1s cutoff ω_c′/Ω.
    pub const HYDROGEN_3P1S_CUTOFF_LITERAL: f64 = 412.0;
    /// Literal 3p-1s cutoff in rad/s.
    pub const HYDROGEN_3P1S_CUTOFF_RAD_S: f64 = 7.547e18;
    /// 3p-1s transition frequency in rad/s.
    pub const HYDROGEN_3P1S_OMEGA: f64 = 1.83e16;

    /// Amplitude and cutoff shared by the Ohmic-family presets.
    pub const OHMIC_AMPLITUDE: f64 = 1e-8;
    pub const OHMIC_CUTOFF: f64 = 500.0;

    pub fn hydrogen_2p1s() -> Spectrum {
        Spectrum::hydrogen_2p1s(HydrogenParams {
            eta: HYDROGEN_ETA,
            omega_c: HYDROGEN_2P1S_CUTOFF,
        })
        .with_scale(HYDROGEN_2P1S_OMEGA)
    }

    pub fn hydrogen_3p1s() -> Spectrum {
        Spectrum::hydrogen_3p1s(HydrogenParams {
            eta: HYDROGEN_ETA,
            omega_c: HYDROGEN_3P1S_CUTOFF,
        })
        .with_scale(HYDROGEN_3P1S_OMEGA)
    }

    /// The 3p-1s spectrum with the tabulated constants, uncalibrated.
    pub fn hydrogen_3p1s_literal() -> Spectrum {
        Spectrum::hydrogen_3p1s(HydrogenParams {
            eta: HYDROGEN_3P1S_ETA_LITERAL,
            omega_c: HYDROGEN_3P1S_CUTOFF_LITERAL,
        })
        .with_scale(HYDROGEN_3P1S_OMEGA)
    }

    /// Ohmic-family spectrum at A = 1e-8, ω_c = 500Ω.
    pub fn ohmic_family(exponent: f64) -> Spectrum {
        Spectrum::ohmic(OhmicParams {
            amplitude: OHMIC_AMPLITUDE,
            exponent,
            omega_c: OHMIC_CUTOFF,
        })
    }

    /// The sub-Ohmic spectrum whose peak sω_c sits at Ω.
    pub fn sub_ohmic_matched() -> Spectrum {
        ohmic_family(1.0 / OHMIC_CUTOFF)
    }

    impl Spectrum {
        fn with_scale(self, scale: f64) -> Self {
            Self {
                omega_scale: Some(scale),
                ..self
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        while (b - a).abs() > 1e-10 * b.abs() {
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        0.5 * (a + b)
    }

    #[test]
    fn hydrogen_at_cutoff() {
        let s = presets::hydrogen_2p1s();
        let got = eval_spectrum(&s, 550.0).unwrap();
        assert!((got - presets::HYDROGEN_ETA * 550.0 / 16.0).abs() < 1e-22);
    }

    #[test]
    fn negative_frequencies_vanish() {
        for s in [
            presets::hydrogen_2p1s(),
            presets::hydrogen_3p1s(),
            presets::ohmic_family(0.5),
        ] {
            assert_eq!(eval_spectrum(&s, -1.0).unwrap(), 0.0);
        }
        assert!(eval_spectrum(&presets::hydrogen_2p1s(), f64::NAN).is_err());
    }

    #[test]
    fn hydrogen_peak_at_cutoff_over_root_seven() {
        let s = presets::hydrogen_2p1s();
        let peak = golden_max(|w| s.value(w), 1.0, 550.0);
        let expected = 550.0 / 7f64.sqrt();
        assert!((peak - expected).abs() / expected < 1e-7, "{peak}");
    }

    #[test]
    fn ohmic_peak_at_s_omega_c() {
        for s in [0.5, 1.0, 2.0] {
            let spec = presets::ohmic_family(s);
            let peak = golden_max(|w| spec.value(w), 1e-3, 5000.0);
            assert!((peak - s * 500.0).abs() / (s * 500.0) < 1e-7, "s = {s}: {peak}");
        }
    }

    #[test]
    fn ohmic_total_weight_is_gamma_integral() {
        for s in [0.002, 0.5, 1.0, 2.0, 3.7] {
            let spec = presets::ohmic_family(s);
            let expected = 1e-8 * 500.0f64.powi(2) * gamma(1.0 + s);
            let got = spectrum_total_weight(&spec).unwrap();
            assert!((got - expected).abs() / expected < 1e-10, "s = {s}");
        }
        assert_eq!(spectrum_total_weight(&Spectrum::zero()).unwrap(), 0.0);
    }

    #[test]
    fn hydrogen_total_weight_matches_riemann_sum() {
        let spec = presets::hydrogen_2p1s();
        // The tail beyond 200 ω_c carries ~ 1e-14 of the weight.
        let upper = 200.0 * 550.0;
        let panels = 1_000_000;
        let h = upper / panels as f64;
        let riemann: f64 = (0..panels).map(|i| spec.value((i as f64 + 0.5) * h)).sum::<f64>() * h;
        let got = spectrum_total_weight(&spec).unwrap();
        assert!((got - riemann).abs() / riemann < 1e-8, "{got} vs {riemann}");
        // closed form η ω_c² / 6
        let exact = presets::HYDROGEN_ETA * 550.0 * 550.0 / 6.0;
        assert!((got - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn modification_factor_pole_is_an_error() {
        assert!(modification_factor(-1.0, 1.0, 0.9).is_err());
        assert_eq!(modification_factor(3.0, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn modification_factor_matches_expanded_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let omega0: f64 = rng.gen_range(0.1..10.0);
            let omega_prime = omega0 * (1.0 - rng.gen_range(0.0..0.5));
            let w: f64 = rng.gen_range(0.0..1000.0);
            let expanded = 1.0
                + (3.0 * omega0 - omega_prime + 2.0 * w) * (omega0 - omega_prime)
                    / (w + omega0).powi(2);
            let f = modification_factor(w, omega0, omega_prime).unwrap();
            assert!((f - expanded).abs() <= 1e-12 * expanded);
        }
    }

    proptest! {
        #[test]
        fn spectra_are_non_negative(
            amp in 0.0f64..1.0,
            s in 0.001f64..6.0,
            wc in 0.01f64..1e4,
            w in -1e5f64..1e6,
        ) {
            let specs = [
                Spectrum::ohmic(OhmicParams::new(amp, s, wc).unwrap()),
                Spectrum::hydrogen_2p1s(HydrogenParams::new(amp + 1e-12, wc).unwrap()),
                Spectrum::hydrogen_3p1s(HydrogenParams::new(amp + 1e-12, wc).unwrap()),
            ];
            for spec in &specs {
                let g = eval_spectrum(spec, w).unwrap();
                prop_assert!(g >= 0.0 && g.is_finite());
                if w < 0.0 {
                    prop_assert_eq!(g, 0.0);
                }
            }
        }
    }

    #[test]
    fn params_are_validated() {
        assert!(OhmicParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(OhmicParams::new(1.0, 0.0, 1.0).is_err());
        assert!(OhmicParams::new(1.0, 1.0, 0.0).is_err());
        assert!(HydrogenParams::new(0.0, 1.0).is_err());
        assert!(HydrogenParams::new(1.0, f64::INFINITY).is_err());
    }
}
