//! Overflow-guarded storage for the `chi` recursion.

/// Magnitude above which `chi` switches to log-magnitude storage.
pub const CHI_LOG_THRESHOLD: f64 = 1e280;

/// A real number kept either as a plain `f64` or, once its magnitude passes
/// [`CHI_LOG_THRESHOLD`], as sign plus natural log of the magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuardedScalar {
    Plain(f64),
    Log { negative: bool, ln_abs: f64 },
}

impl GuardedScalar {
    pub fn new(value: f64) -> Self {
        if value.abs() > CHI_LOG_THRESHOLD && value.is_finite() {
            GuardedScalar::Log {
                negative: value < 0.0,
                ln_abs: value.abs().ln(),
            }
        } else {
            GuardedScalar::Plain(value)
        }
    }

    /// Returns `factor * self`, moving to log storage on overflow risk.
    pub fn scaled(self, factor: f64) -> Self {
        match self {
            GuardedScalar::Plain(v) => {
                let prod = v * factor;
                if prod.is_finite() && prod.abs() <= CHI_LOG_THRESHOLD {
                    GuardedScalar::Plain(prod)
                } else if v == 0.0 || factor == 0.0 {
                    GuardedScalar::Plain(0.0)
                } else {
                    GuardedScalar::Log {
                        negative: (v < 0.0) != (factor < 0.0),
                        ln_abs: v.abs().ln() + factor.abs().ln(),
                    }
                }
            }
            GuardedScalar::Log { negative, ln_abs } => {
                if factor == 0.0 {
                    return GuardedScalar::Plain(0.0);
                }
                let ln_abs = ln_abs + factor.abs().ln();
                let negative = negative != (factor < 0.0);
                if ln_abs <= CHI_LOG_THRESHOLD.ln() {
                    let mag = ln_abs.exp();
                    GuardedScalar::Plain(if negative { -mag } else { mag })
                } else {
                    GuardedScalar::Log { negative, ln_abs }
                }
            }
        }
    }

    /// Nearest `f64`; saturates to infinity in log storage beyond `f64::MAX`.
    pub fn value(self) -> f64 {
        match self {
            GuardedScalar::Plain(v) => v,
            GuardedScalar::Log { negative, ln_abs } => {
                let mag = ln_abs.exp();
                if negative {
                    -mag
                } else {
                    mag
                }
            }
        }
    }

    /// `|factor * self|` evaluated without intermediate overflow.
    pub fn abs_times(self, factor: f64) -> f64 {
        match self {
            GuardedScalar::Plain(v) => (v * factor).abs(),
            GuardedScalar::Log { ln_abs, .. } => {
                if factor == 0.0 {
                    0.0
                } else {
                    (ln_abs + factor.abs().ln()).exp()
                }
            }
        }
    }

    pub fn is_log(self) -> bool {
        matches!(self, GuardedScalar::Log { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_arithmetic() {
        let c = GuardedScalar::new(3.0).scaled(-0.5);
        assert_eq!(c, GuardedScalar::Plain(-1.5));
        assert_eq!(c.abs_times(2.0), 3.0);
    }

    #[test]
    fn overflow_switches_to_log() {
        let mut c = GuardedScalar::new(1.0);
        for _ in 0..40 {
            c = c.scaled(-1e10);
        }
        assert!(c.is_log());
        // sign flips 40 times -> positive; |c| = 1e400
        assert!(matches!(c, GuardedScalar::Log { negative: false, .. }));
        let r = c.abs_times(1e-300);
        // log storage keeps about |ln| * eps relative accuracy
        assert!((r - 1e100).abs() / 1e100 < 1e-10);
        // shrinking back returns to plain storage
        for _ in 0..20 {
            c = c.scaled(1e-10);
        }
        assert!(!c.is_log());
        assert!((c.value() - 1e200).abs() / 1e200 < 1e-10);
    }
}
