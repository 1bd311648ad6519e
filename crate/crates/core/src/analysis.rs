//! Rate curves over τ and their Zeno / anti-Zeno classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, ZenoError};
use crate::rate::{decay_rate, Approach, RatePoint};
use crate::renorm::AtomBathModel;

/// peak_ratio − 1 must exceed this for the anti-Zeno regime to count.
pub const QAZE_TOL: f64 = 1e-9;

/// Bisection stops once |ratio − 1| is below this.
pub const CROSSING_TOL: f64 = 1e-6;

/// Points in the default τ grid.
pub const DEFAULT_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCurve {
    pub approach: Approach,
    pub model: String,
    pub points: Vec<RatePoint>,
}

impl RateCurve {
    /// Checks that τ increases strictly and ratios are finite wherever R₀ > 0.
    pub fn new(approach: Approach, model: impl Into<String>, points: Vec<RatePoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].tau <= w[0].tau) {
            return Err(ZenoError::Invalid("curve tau values must increase strictly".into()));
        }
        if let Some(p) = points.iter().find(|p| p.r0 > 0.0 && !p.ratio.is_finite()) {
            return Err(ZenoError::Invalid(format!("non-finite ratio at tau = {}", p.tau)));
        }
        Ok(Self {
            approach,
            model: model.into(),
            points,
        })
    }

    pub fn taus(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tau).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ratio).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    /// Smallest τ with R/R₀ = 1, if the curve crosses 1.
    pub tau_star: Option<f64>,
    pub tau_peak: f64,
    pub peak_ratio: f64,
    pub qaze_present: bool,
    /// Sign changes of R/R₀ − 1 along the sampled curve.
    pub crossing_count: usize,
    /// Interior local maxima of R/R₀ along the sampled curve.
    pub peak_count: usize,
}

/// Anything that can evaluate R/R₀ at arbitrary τ, used to refine a sampled
/// curve between its grid points.
pub trait RatioSource: Sync {
    fn ratio(&self, tau: f64) -> Result<f64>;
}

impl<F> RatioSource for F
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    fn ratio(&self, tau: f64) -> Result<f64> {
        self(tau)
    }
}

/// R/R₀ of one approach of one model.
pub struct ModelRatio<'a> {
    pub model: &'a AtomBathModel,
    pub approach: Approach,
}

impl RatioSource for ModelRatio<'_> {
    fn ratio(&self, tau: f64) -> Result<f64> {
        decay_rate(self.model, tau, self.approach).map(|p| p.ratio)
    }
}

/// `count` log-spaced points from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max.is_finite()) || count == 0 || (count > 1 && max <= min) {
        return Err(ZenoError::Invalid(format!(
            "log grid needs 0 < min < max and count >= 1, got [{min}, {max}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.ln(), max.ln());
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                max
            } else {
                (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

/// `count` evenly spaced points from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max.is_finite()) || count == 0 || (count > 1 && max <= min) {
        return Err(ZenoError::Invalid(format!(
            "linear grid needs 0 < min < max and count >= 1, got [{min}, {max}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    Ok((0..count)
        .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
        .collect())
}

/// 200 log-spaced τ with τω_c from 1e-2 to 1e3.
pub fn default_tau_grid(omega_c: f64) -> Vec<f64> {
    log_grid(1e-2 / omega_c, 1e3 / omega_c, DEFAULT_GRID_POINTS).expect("positive cutoff")
}

/// One rate point per τ, evaluated in parallel. The first failing τ (in
/// grid order) aborts the sweep.
pub fn sweep_rate_curve(model: &AtomBathModel, approach: Approach, taus: &[f64]) -> Result<RateCurve> {
    check_grid(taus)?;
    let results: Vec<Result<RatePoint>> = taus.par_iter().map(|&t| decay_rate(model, t, approach)).collect();
    let points = results
        .into_iter()
        .zip(taus)
        .map(|(r, &tau)| {
            r.map_err(|e| ZenoError::Sweep {
                tau,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RateCurve::new(approach, model.spectrum().name(), points)
}

fn check_grid(taus: &[f64]) -> Result<()> {
    if taus.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(ZenoError::Invalid("tau grid must be positive and finite".into()));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ZenoError::Invalid("tau grid must increase strictly".into()));
    }
    Ok(())
}

/// Classifies a curve, refining the first crossing by bisection in log τ and
/// the peak by golden-section search, both against `source`.
pub fn find_transition(curve: &RateCurve, source: &dyn RatioSource) -> Result<RegimeReport> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.ratio.is_finite())
        .map(|p| (p.tau, p.ratio))
        .collect();
    if pts.len() < 3 {
        return Err(ZenoError::Invalid(format!(
            "need at least 3 finite points to classify a curve, got {}",
            pts.len()
        )));
    }

    let side = |r: f64| (r - 1.0).signum();
    let mut crossing_count = 0;
    let mut tau_star = None;
    for w in pts.windows(2) {
        let (d0, d1) = (w[0].1 - 1.0, w[1].1 - 1.0);
        if d0 == 0.0 && tau_star.is_none() {
            tau_star = Some(w[0].0);
        }
        if d0 != 0.0 && d1 != 0.0 && side(w[0].1) != side(w[1].1) {
            crossing_count += 1;
            if tau_star.is_none() {
                tau_star = Some(bisect_crossing(source, w[0], w[1])?);
            }
        }
    }

    let peak_count = pts
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 + QAZE_TOL && w[1].1 > w[2].1 + QAZE_TOL)
        .count();

    let (imax, &(tau_max, ratio_max)) = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty");
    let (tau_peak, peak_ratio) = if imax > 0 && imax + 1 < pts.len() {
        let (t, r) = golden_max(source, pts[imax - 1].0, pts[imax + 1].0)?;
        if r > ratio_max {
            (t, r)
        } else {
            (tau_max, ratio_max)
        }
    } else {
        (tau_max, ratio_max)
    };

    Ok(RegimeReport {
        tau_star,
        tau_peak,
        peak_ratio,
        qaze_present: peak_ratio > 1.0 + QAZE_TOL,
        crossing_count,
        peak_count,
    })
}

fn bisect_crossing(source: &dyn RatioSource, lo: (f64, f64), hi: (f64, f64)) -> Result<f64> {
    let (mut a, mut b) = (lo.0.ln(), hi.0.ln());
    let sa = (lo.1 - 1.0).signum();
    let (mut best_t, mut best_d) = if (lo.1 - 1.0).abs() < (hi.1 - 1.0).abs() {
        (lo.0, (lo.1 - 1.0).abs())
    } else {
        (hi.0, (hi.1 - 1.0).abs())
    };
    for _ in 0..200 {
        if best_d < CROSSING_TOL || b - a < 1e-15 {
            break;
        }
        let m = 0.5 * (a + b);
        let r = source.ratio(m.exp())?;
        let d = r - 1.0;
        if d.abs() < best_d {
            best_t = m.exp();
            best_d = d.abs();
        }
        if d.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(best_t)
}

fn golden_max(source: &dyn RatioSource, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = source.ratio(c.exp())?;
    let mut fd = source.ratio(d.exp())?;
    while b - a > 1e-6 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = source.ratio(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = source.ratio(d.exp())?;
        }
    }
    Ok(if fc > fd { (c.exp(), fc) } else { (d.exp(), fd) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproachRow {
    pub tau: f64,
    pub r_i: f64,
    pub r_ii: f64,
    pub r_rwa: f64,
    pub delta_r_i: f64,
    pub delta_r_ii: f64,
    pub r0_i: f64,
    pub r0_ii: f64,
    pub r0_rwa: f64,
}

/// All three approaches side by side on one τ grid.
pub fn compare_approaches(model: &AtomBathModel, taus: &[f64]) -> Result<Vec<ApproachRow>> {
    check_grid(taus)?;
    taus.par_iter()
        .map(|&tau| {
            let row = || -> Result<ApproachRow> {
                let i = decay_rate(model, tau, Approach::ApproachI)?;
                let ii = decay_rate(model, tau, Approach::ApproachII)?;
                let rwa = decay_rate(model, tau, Approach::Rwa)?;
                Ok(ApproachRow {
                    tau,
                    r_i: i.rate,
                    r_ii: ii.rate,
                    r_rwa: rwa.rate,
                    delta_r_i: (i.rate - rwa.rate).abs(),
                    delta_r_ii: (ii.rate - rwa.rate).abs(),
                    r0_i: i.r0,
                    r0_ii: ii.r0,
                    r0_rwa: rwa.r0,
                })
            };
            row().map_err(|e| ZenoError::Sweep {
                tau,
                source: Box::new(e),
            })
        })
        .collect()
}
