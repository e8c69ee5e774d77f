use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A real number stored as `sign * exp(logmag)`.
///
/// Quantities such as `n!`, `D_n(x)` for `n ~ 200` or `D_{-n-1}(100)` leave
/// the range of `f64` long before the ratios built from them do; keeping the
/// logarithm avoids both overflow and underflow until the final combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    sign: i8,
    logmag: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        logmag: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        logmag: 0.0,
    };

    /// Builds a value from its parts; a zero sign forces the canonical zero.
    pub fn new(sign: i8, logmag: f64) -> Self {
        if sign == 0 || logmag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog {
                sign: sign.signum(),
                logmag,
            }
        }
    }

    /// `exp(logmag)` with positive sign.
    pub fn exp(logmag: f64) -> Self {
        Self::new(1, logmag)
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if v > 0.0 { 1 } else { -1 },
                logmag: v.abs().ln(),
            }
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn logmag(self) -> f64 {
        self.logmag
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Converts to `f64`, saturating to `±inf` or flushing to zero.
    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.logmag.exp()
        }
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                sign: 1,
                logmag: self.logmag,
            }
        }
    }

    pub fn recip(self) -> Self {
        SignedLog {
            sign: self.sign,
            logmag: -self.logmag,
        }
    }

    /// Multiplies by `exp(delta)`.
    pub fn scale_log(self, delta: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                sign: self.sign,
                logmag: self.logmag + delta,
            }
        }
    }

    /// Relative difference `|a/b - 1|`, computed without leaving log space.
    pub fn rel_diff(self, reference: SignedLog) -> f64 {
        match (self.sign, reference.sign) {
            (0, 0) => 0.0,
            (0, _) | (_, 0) => 1.0,
            (a, b) if a != b => 2.0,
            _ => (self.logmag - reference.logmag).exp_m1().abs(),
        }
    }
}

/// Signed sum evaluated with a log-sum-exp shift.
impl Add for SignedLog {
    type Output = SignedLog;

    fn add(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.logmag >= other.logmag {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.logmag - big.logmag).exp();
        if big.sign != small.sign && ratio == 1.0 {
            return SignedLog::ZERO;
        }
        let shift = if big.sign == small.sign {
            ratio.ln_1p()
        } else {
            (-ratio).ln_1p()
        };
        SignedLog {
            sign: big.sign,
            logmag: big.logmag + shift,
        }
    }
}

impl Sub for SignedLog {
    type Output = SignedLog;

    fn sub(self, other: SignedLog) -> SignedLog {
        self + (-other)
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            logmag: self.logmag + rhs.logmag,
        }
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    /// Division by zero yields a value with infinite `logmag`.
    fn div(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog {
            sign: if rhs.sign == 0 {
                self.sign
            } else {
                self.sign * rhs.sign
            },
            logmag: self.logmag - rhs.logmag,
        }
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            logmag: self.logmag,
        }
    }
}

impl From<f64> for SignedLog {
    fn from(v: f64) -> Self {
        SignedLog::from_f64(v)
    }
}

impl fmt::Display for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s < 0 { "-" } else { "" }, self.logmag),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_is_canonical() {
        assert!(SignedLog::new(0, 3.0).is_zero());
        assert!(SignedLog::from_f64(0.0).is_zero());
        assert_eq!(SignedLog::ZERO.to_f64(), 0.0);
        assert!((SignedLog::from_f64(2.0) * SignedLog::ZERO).is_zero());
    }

    #[test]
    fn huge_values_survive_products() {
        let a = SignedLog::exp(800.0);
        let b = SignedLog::new(-1, -795.0);
        assert!(((a * b).to_f64() + 5f64.exp()).abs() < 1e-10);
        assert!(((a / SignedLog::exp(799.0)).to_f64() - 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn signed_addition() {
        let a = SignedLog::from_f64(3.0);
        let b = SignedLog::from_f64(-5.0);
        assert!(((a + b).to_f64() + 2.0).abs() < 1e-15);
        assert!((a - a).is_zero());
    }

    proptest! {
        #[test]
        fn product_multiplies_signs_and_adds_logs(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            prop_assume!(x != 0.0 && y != 0.0);
            let p = SignedLog::from_f64(x) * SignedLog::from_f64(y);
            prop_assert_eq!(p.sign(), (x * y).signum() as i8);
            prop_assert!((p.logmag() - (x.abs().ln() + y.abs().ln())).abs() < 1e-12);
            prop_assert!((p.to_f64() - x * y).abs() <= 1e-12 * (x * y).abs());
        }

        #[test]
        fn roundtrip_through_f64(x in -1e300f64..1e300) {
            let back = SignedLog::from_f64(x).to_f64();
            prop_assert!((back - x).abs() <= 1e-12 * x.abs());
        }
    }
}
