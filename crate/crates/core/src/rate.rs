//! Decay rate under repeated projective measurement,
//! R(τ) = 2π ∫ F(ω, c, τ) G_eff(ω) dω with F = (τ/2π) sinc²((ω−c)τ/2).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::quad::{integrate, integrate_to_infinity, CompensatedSum, Tolerance};
use crate::renorm::AtomBathModel;
use crate::spectra::Spectrum;

/// Relative accuracy of each overlap integral. Approach-II rate differences
/// are ~1e-8 of R, so this sits well below the 1e-8 the rates themselves need.
const OVERLAP_TOL: f64 = 1e-12;

/// Lobes integrated one by one before the tail is replaced by its average.
pub const MAX_LOBES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    #[serde(rename = "RWA")]
    Rwa,
    #[serde(rename = "I")]
    ApproachI,
    #[serde(rename = "II")]
    ApproachII,
}

impl Approach {
    pub fn label(&self) -> &'static str {
        match self {
            Approach::Rwa => "RWA",
            Approach::ApproachI => "I",
            Approach::ApproachII => "II",
        }
    }
}

impl std::fmt::Display for Approach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Approach {
    type Err = ZenoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rwa" => Ok(Approach::Rwa),
            "i" | "1" | "approach-i" => Ok(Approach::ApproachI),
            "ii" | "2" | "approach-ii" => Ok(Approach::ApproachII),
            other => Err(ZenoError::Invalid(format!("unknown approach '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementProtocol {
    pub tau: f64,
    pub n: u32,
}

impl MeasurementProtocol {
    pub fn new(tau: f64, n: u32) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(ZenoError::Invalid(format!("tau must be positive, got {tau}")));
        }
        if n == 0 {
            return Err(ZenoError::Invalid("need at least one measurement".into()));
        }
        Ok(Self { tau, n })
    }

    pub fn total_time(&self) -> f64 {
        self.tau * self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub tau: f64,
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    /// R/R₀, NaN when R₀ = 0.
    pub ratio: f64,
    pub approach: Approach,
}

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// F(ω, c, τ) = (τ/2π) sinc²((ω−c)τ/2).
pub fn kernel_f(omega: f64, center: f64, tau: f64) -> f64 {
    let s = sinc(0.5 * (omega - center) * tau);
    tau / (2.0 * PI) * s * s
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(ZenoError::Domain(format!("tau must be positive, got {tau}")))
    }
}

/// Center frequency and effective spectrum of each approach.
pub fn center(model: &AtomBathModel, approach: Approach) -> Result<f64> {
    match approach {
        Approach::Rwa => Ok(model.omega0()),
        Approach::ApproachI => model.omega1(),
        Approach::ApproachII => model.omega_prime(),
    }
}

fn effective_weight(
    model: &AtomBathModel,
    approach: Approach,
) -> Result<impl Fn(f64) -> f64 + '_> {
    let w0 = model.omega0();
    let wp = match approach {
        Approach::ApproachII => model.omega_prime()?,
        _ => w0,
    };
    let spec = model.spectrum();
    Ok(move |w: f64| {
        let g = spec.value(w);
        if approach == Approach::ApproachII {
            let r = (2.0 * w0 + w - wp) / (w + w0);
            r * r * g
        } else {
            g
        }
    })
}

/// R and R₀ for one approach at one τ.
pub fn decay_rate(model: &AtomBathModel, tau: f64, approach: Approach) -> Result<RatePoint> {
    check_tau(tau)?;
    let c = center(model, approach)?;
    let weight = effective_weight(model, approach)?;
    let r0 = 2.0 * PI * weight(c);
    let rate = if model.spectrum().is_zero() {
        0.0
    } else {
        overlap(&weight, c, tau, model.spectrum())?
    };
    Ok(RatePoint {
        tau,
        rate,
        r0,
        ratio: if r0 > 0.0 { rate / r0 } else { f64::NAN },
        approach,
    })
}

/// |R(approach) − R(RWA)| at equal τ.
pub fn delta_r(model: &AtomBathModel, tau: f64, approach: Approach) -> Result<f64> {
    if approach == Approach::Rwa || model.spectrum().is_zero() {
        check_tau(tau)?;
        return Ok(0.0);
    }
    let r = decay_rate(model, tau, approach)?.rate;
    let rwa = decay_rate(model, tau, Approach::Rwa)?.rate;
    Ok((r - rwa).abs())
}

/// The approach-II rate split as R₁ + R₂ + R₃ with spectra
/// G₁ = (2Ω/(ω+Ω))² G, G₂ = 4Ω(ω−Ω′)/(ω+Ω)² G, G₃ = ((ω−Ω′)/(ω+Ω))² G.
pub fn rate_decomposition(model: &AtomBathModel, tau: f64) -> Result<(f64, f64, f64)> {
    check_tau(tau)?;
    let spec = model.spectrum();
    if spec.is_zero() {
        return Ok((0.0, 0.0, 0.0));
    }
    let w0 = model.omega0();
    let wp = model.omega_prime()?;
    let g1 = |w: f64| (2.0 * w0 / (w + w0)).powi(2) * spec.value(w);
    let g2 = |w: f64| 4.0 * w0 * (w - wp) / (w + w0).powi(2) * spec.value(w);
    let g3 = |w: f64| ((w - wp) / (w + w0)).powi(2) * spec.value(w);
    Ok((
        overlap(&g1, wp, tau, spec)?,
        overlap(&g2, wp, tau, spec)?,
        overlap(&g3, wp, tau, spec)?,
    ))
}

/// P(nτ) = exp(−R n τ); n = 0 gives 1.
pub fn survival_probability(rate: f64, protocol: &MeasurementProtocol) -> f64 {
    if protocol.n == 0 || rate == 0.0 {
        return 1.0;
    }
    (-rate * protocol.total_time()).exp()
}

/// τ ∫₀^∞ sinc²((ω−c)τ/2) w(ω) dω.
///
/// The range is cut at the sinc zeros c + 2πm/τ and every lobe is integrated
/// adaptively, with extra breakpoints at ω_c·2^k so that one wide lobe at
/// small τ still resolves the spectrum. Past the center the remainder is
/// bounded by 4/(τ(ω−c)²)·∫|w|; lobes stop once that bound is below
/// `OVERLAP_TOL` of the running sum. After [`MAX_LOBES`] the remainder is
/// replaced by its lobe average (2/τ)∫ w/(ω−c)² dω.
pub(crate) fn overlap(w: &dyn Fn(f64) -> f64, c: f64, tau: f64, spec: &Spectrum) -> Result<f64> {
    let width = 2.0 * PI / tau;
    let integrand = |x: f64| {
        let s = sinc(0.5 * (x - c) * tau);
        tau * s * s * w(x)
    };
    let breaks = breakpoints(spec);
    let lobe_tol = Tolerance::relative(OVERLAP_TOL);

    let mut m = (-c / width).floor() + 1.0;
    let mut a = 0.0;
    let mut total = CompensatedSum::new();
    let mut lobes = 0usize;
    let mut next_check = 1usize;
    loop {
        let b = c + m * width;
        m += 1.0;
        if b <= a {
            continue;
        }
        let lo = breaks.partition_point(|&x| x <= a);
        let hi = breaks.partition_point(|&x| x < b);
        let mut points = Vec::with_capacity(hi - lo + 2);
        points.push(a);
        points.extend_from_slice(&breaks[lo..hi]);
        points.push(b);
        total.add(integrate(&integrand, &points, lobe_tol).map_err(ZenoError::numerical("decay-rate overlap integral"))?.value);
        lobes += 1;
        a = b;

        if a <= c || (lobes < next_check && lobes < MAX_LOBES) {
            continue;
        }
        next_check = 2 * lobes;
        let tail = tail_weight(&|x| w(x).abs(), a, spec)?;
        let bound = 4.0 / (tau * (a - c).powi(2)) * tail;
        if bound <= OVERLAP_TOL * total.value().abs() {
            break;
        }
        if lobes >= MAX_LOBES {
            let avg = tail_weight(&|x| w(x) / (x - c).powi(2), a, spec)?;
            total.add(2.0 / tau * avg);
            break;
        }
    }
    Ok(total.value())
}

fn tail_weight(w: &dyn Fn(f64) -> f64, from: f64, spec: &Spectrum) -> Result<f64> {
    let features: Vec<f64> = spec.features().into_iter().filter(|&x| x > from).collect();
    integrate_to_infinity(w, from, from.max(spec.cutoff()), &features, Tolerance::relative(1e-6))
        .map(|i| i.value)
        .map_err(ZenoError::integrability("overlap tail"))
}

fn breakpoints(spec: &Spectrum) -> Vec<f64> {
    let wc = spec.cutoff();
    let mut v = spec.features();
    v.extend((-30..=60).map(|k| wc * 2f64.powi(k)));
    v.retain(|&x| x > 0.0 && x.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}
