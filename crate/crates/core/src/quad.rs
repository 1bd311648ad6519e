//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite ranges.
//!
//! Everything in the crate that turns a spectral density into a number goes
//! through here: level shifts, total weights, and the per-lobe pieces of the
//! oscillatory overlap integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the 7-point rule sharing the odd Kronrod abscissae.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Segments allowed per call to [`integrate`] before giving up.
pub const DEFAULT_MAX_SEGMENTS: usize = 4000;

/// Doublings of the upper limit tried by [`integrate_to_infinity`].
const MAX_DOUBLINGS: usize = 90;

/// Relative size below which a doubled tail piece counts as negligible.
pub const TAIL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e}, requested {requested:e}")]
    NotConverged {
        value: f64,
        error: f64,
        requested: f64,
    },
    #[error("integrand is not finite at x = {at}")]
    NonFinite { at: f64 },
    #[error("integral diverges: tail still contributes {tail:e} of {total:e} at upper limit {upper:e}")]
    Divergent { total: f64, tail: f64, upper: f64 },
    #[error("invalid integration range [{a}, {b}]")]
    BadRange { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // Error estimate attributable to rounding alone.
    roundoff: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// One 15-point Gauss–Kronrod panel on `[a, b]`.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite { at: x })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let h = half.abs();
    Ok(Segment {
        a,
        b,
        value: res_k * half,
        error: rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h),
        roundoff: 50.0 * f64::EPSILON * res_abs * h,
    })
}

/// Globally adaptive integration over the union of the consecutive intervals
/// delimited by `points` (which must be non-decreasing, at least two entries).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    integrate_limited(f, points, tol, DEFAULT_MAX_SEGMENTS)
}

pub fn integrate_limited<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    tol: Tolerance,
    max_segments: usize,
) -> Result<Integral, QuadError> {
    if points.len() < 2 {
        return Err(QuadError::BadRange {
            a: points.first().copied().unwrap_or(f64::NAN),
            b: f64::NAN,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(QuadError::BadRange { a, b });
        }
        if b > a {
            heap.push(kronrod15(&f, a, b)?);
            evaluations += 15;
        }
    }
    if heap.is_empty() {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations,
        });
    }

    loop {
        let value: CompensatedSum = heap.iter().map(|s| s.value).collect();
        let value = value.value();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        let roundoff: f64 = heap.iter().map(|s| s.roundoff).sum();
        let requested = tol.target(value);
        // Below the rounding floor further bisection cannot help.
        if error <= requested || error <= roundoff {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if heap.len() >= max_segments {
            return Err(QuadError::NotConverged {
                value,
                error,
                requested,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution; keep its estimate.
            return Err(QuadError::NotConverged {
                value,
                error,
                requested,
            });
        }
        heap.push(kronrod15(&f, worst.a, mid)?);
        heap.push(kronrod15(&f, mid, worst.b)?);
        evaluations += 30;
    }
}

/// Integrates `f` over `[start, ∞)`.
///
/// The range is first covered up to `start + scale` (with any `features`
/// inside it used as breakpoints); the upper limit is then doubled until two
/// consecutive added pieces each fall below [`TAIL_CUTOFF`] of the running
/// total.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    scale: f64,
    features: &[f64],
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    if !(start.is_finite() && scale.is_finite() && scale > 0.0) {
        return Err(QuadError::BadRange { a: start, b: scale });
    }
    let mut upper = start + scale;
    let mut points = vec![start];
    points.extend(features.iter().copied().filter(|&x| x > start && x < upper));
    points.push(upper);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let head = integrate(&f, &points, tol)?;
    let mut total = CompensatedSum::new();
    total.add(head.value);
    let mut error = head.error;
    let mut evaluations = head.evaluations;
    let mut quiet = 0;

    for _ in 0..MAX_DOUBLINGS {
        let next = start + 2.0 * (upper - start);
        let piece = integrate(&f, &[upper, next], tol)?;
        total.add(piece.value);
        error += piece.error;
        evaluations += piece.evaluations;
        upper = next;
        if piece.value.abs() <= TAIL_CUTOFF * total.value().abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(Integral {
                    value: total.value(),
                    error,
                    evaluations,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Err(QuadError::Divergent {
        total: total.value(),
        tail: error,
        upper,
    })
}
