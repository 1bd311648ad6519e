use crate::error::{Result, ZenoError};

/// A sampled spectrum with monotone piecewise-cubic (PCHIP) interpolation.
///
/// Below the first knot G is zero. Above the last knot it decays as
/// G_last·exp(−(ω − ω_last)/h) with h the last knot spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedSpectrum {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(ZenoError::Invalid(format!(
                "{} abscissae but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.len() < 2 {
            return Err(ZenoError::Invalid("need at least two samples".into()));
        }
        for (i, (&w, &g)) in knots.iter().zip(&values).enumerate() {
            if !w.is_finite() || !g.is_finite() {
                return Err(ZenoError::Invalid(format!("sample {i} is not finite")));
            }
            if g < 0.0 {
                return Err(ZenoError::Invalid(format!("sample {i} is negative: G = {g}")));
            }
            if w < 0.0 {
                return Err(ZenoError::Invalid(format!("sample {i} has negative frequency {w}")));
            }
            if i > 0 && w <= knots[i - 1] {
                return Err(ZenoError::Invalid(format!(
                    "abscissae must be strictly increasing (sample {i})"
                )));
            }
        }
        let slopes = pchip_slopes(&knots, &values);
        Ok(Self {
            knots,
            values,
            slopes,
        })
    }

    /// Parses whitespace-delimited `ω G` lines. `#` starts a comment.
    ///
    /// A `# units: rad/s` header marks the abscissae as physical; they are then
    /// divided by Ω, taken from a `# omega0: <rad/s>` header or from
    /// `omega_scale`. Returns the spectrum together with Ω in rad/s if known.
    pub fn parse(text: &str, omega_scale: Option<f64>) -> Result<(Self, Option<f64>)> {
        let mut si = false;
        let mut header_scale = None;
        let mut knots = Vec::new();
        let mut values = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let (data, comment) = match raw.find('#') {
                Some(i) => (&raw[..i], Some(&raw[i + 1..])),
                None => (raw, None),
            };
            if let Some(c) = comment {
                if let Some((key, value)) = c.split_once(':') {
                    let value = value.trim();
                    match key.trim().to_ascii_lowercase().as_str() {
                        "units" => match value {
                            "rad/s" => si = true,
                            "reduced" | "omega" => si = false,
                            other => {
                                return Err(ZenoError::Parse {
                                    line,
                                    message: format!("unknown units '{other}'"),
                                })
                            }
                        },
                        "omega0" => {
                            header_scale = Some(value.parse::<f64>().map_err(|e| {
                                ZenoError::Parse {
                                    line,
                                    message: format!("bad omega0 '{value}': {e}"),
                                }
                            })?)
                        }
                        _ => {}
                    }
                }
            }
            let mut fields = data.split_whitespace();
            let Some(first) = fields.next() else { continue };
            let second = fields.next().ok_or_else(|| ZenoError::Parse {
                line,
                message: "expected two columns".into(),
            })?;
            if fields.next().is_some() {
                return Err(ZenoError::Parse {
                    line,
                    message: "expected two columns".into(),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| ZenoError::Parse {
                    line,
                    message: format!("'{s}': {e}"),
                })
            };
            knots.push(parse(first)?);
            values.push(parse(second)?);
        }

        let scale = omega_scale.or(header_scale);
        if si {
            let scale = scale.ok_or_else(|| {
                ZenoError::Invalid(
                    "rad/s data needs Omega in rad/s (omega0 header or explicit scale)".into(),
                )
            })?;
            if !(scale.is_finite() && scale > 0.0) {
                return Err(ZenoError::Invalid(format!("bad omega scale {scale}")));
            }
            // G(ω) dω is invariant, so G in 1/(rad/s)·(rad/s)² scales as ω.
            for (w, g) in knots.iter_mut().zip(values.iter_mut()) {
                *w /= scale;
                *g /= scale;
            }
        }
        Ok((Self::new(knots, values)?, scale))
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last_knot(&self) -> f64 {
        *self.knots.last().expect("at least two knots")
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&g| g == 0.0)
    }

    /// Every knot: the interpolant is a cubic between knots, so Gauss–Kronrod
    /// is exact on each piece once they are used as breakpoints.
    pub(crate) fn features(&self) -> Vec<f64> {
        self.knots.clone()
    }

    fn tail_length(&self) -> f64 {
        let n = self.knots.len();
        self.knots[n - 1] - self.knots[n - 2]
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let n = self.knots.len();
        if omega < self.knots[0] {
            return 0.0;
        }
        if omega >= self.knots[n - 1] {
            return self.values[n - 1] * (-(omega - self.knots[n - 1]) / self.tail_length()).exp();
        }
        let i = self.knots.partition_point(|&k| k <= omega) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        let t = (omega - self.knots[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.values[i]
            + h10 * h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * h * self.slopes[i + 1];
        // Monotone interpolation of non-negative data stays non-negative up to
        // rounding.
        v.max(0.0)
    }
}

/// Fritsch–Carlson derivatives with the weighted harmonic mean in the
/// interior and the shape-preserving three-point formula at the ends.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::presets;
    use proptest::prelude::*;

    #[test]
    fn round_trip_of_closed_form() {
        let spec = presets::hydrogen_2p1s();
        let upper = 20.0 * 550.0;
        let n = 10_000;
        // Quadratically graded: a uniform grid leaves ~1e-5 error in the first
        // panel, where G is small and PCHIP slopes are only second order.
        let knots: Vec<f64> = (0..n).map(|i| upper * (i as f64 / (n - 1) as f64).powi(2)).collect();
        let values: Vec<f64> = knots.iter().map(|&w| spec.value(w)).collect();
        let table = TabulatedSpectrum::new(knots.clone(), values).unwrap();
        let mut worst = 0.0f64;
        for i in 0..n - 1 {
            let w = knots[i] + 0.37 * (knots[i + 1] - knots[i]);
            let exact = spec.value(w);
            worst = worst.max((table.eval(w) - exact).abs() / exact);
        }
        assert!(worst < 1e-6, "worst relative error {worst}");
    }

    #[test]
    fn clamps_below_and_damps_above() {
        let t = TabulatedSpectrum::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(t.eval(0.5), 0.0);
        assert_eq!(t.eval(3.0), 1.0);
        assert!((t.eval(4.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(t.eval(2.0), 2.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(TabulatedSpectrum::new(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(TabulatedSpectrum::new(vec![1.0, 2.0], vec![1.0, -1.0]).is_err());
        assert!(TabulatedSpectrum::new(vec![1.0], vec![1.0]).is_err());
        assert!(TabulatedSpectrum::new(vec![1.0, 2.0], vec![1.0]).is_err());
    }

    #[test]
    fn parses_reduced_and_si_tables() {
        let text = "# a comment\n0.0 0.0\n1.0 2.0  # inline\n\n2.0 1.0\n";
        let (t, scale) = TabulatedSpectrum::parse(text, None).unwrap();
        assert_eq!(t.knots(), &[0.0, 1.0, 2.0]);
        assert_eq!(scale, None);

        let text = "# units: rad/s\n# omega0: 2.0\n0.0 0.0\n2.0 4.0\n4.0 2.0\n";
        let (t, scale) = TabulatedSpectrum::parse(text, None).unwrap();
        assert_eq!(t.knots(), &[0.0, 1.0, 2.0]);
        assert_eq!(t.values(), &[0.0, 2.0, 1.0]);
        assert_eq!(scale, Some(2.0));

        let err = TabulatedSpectrum::parse("# units: rad/s\n0 0\n1 1\n", None).unwrap_err();
        assert!(matches!(err, ZenoError::Invalid(_)));
        let err = TabulatedSpectrum::parse("0 0\n1 x\n", None).unwrap_err();
        assert!(matches!(err, ZenoError::Parse { line: 2, .. }));
        let err = TabulatedSpectrum::parse("0 0 0\n", None).unwrap_err();
        assert!(matches!(err, ZenoError::Parse { line: 1, .. }));
    }

    proptest! {
        #[test]
        fn interpolation_never_negative(
            values in proptest::collection::vec(0.0f64..10.0, 3..30),
            w in 0.0f64..40.0,
        ) {
            let knots: Vec<f64> = (0..values.len()).map(|i| i as f64 * 1.3).collect();
            let t = TabulatedSpectrum::new(knots, values).unwrap();
            prop_assert!(t.eval(w) >= 0.0);
        }
    }
}
