//! Signed log-domain scalars for quantities that overflow `f64`, such as
//! `e^{lambda^m R_max x}` and the solution values of the scaled equations.

/// A real number stored as `sign * exp(ln_abs)`.
///
/// `sign == 0` encodes exact zero (with `ln_abs` ignored). The representation
/// survives magnitudes far beyond `f64` range; only `ln_abs` must fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogVal {
    pub sign: i8,
    pub ln_abs: f64,
}

impl LogVal {
    pub const ZERO: LogVal = LogVal {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogVal {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogVal {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    /// Converts back to `f64`; overflows to `+-inf`, underflows to 0.
    pub fn to_f64(self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        LogVal::new(self.sign.abs(), self.ln_abs)
    }

    pub fn scale_f64(self, x: f64) -> Self {
        self * Self::from_f64(x)
    }

    /// Multiplies by `exp(t)` without leaving log space.
    pub fn mul_exp(self, t: f64) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        LogVal::new(self.sign, self.ln_abs + t)
    }

    pub fn log10_abs(self) -> f64 {
        self.ln_abs / std::f64::consts::LN_10
    }

    /// Compares magnitudes.
    pub fn abs_cmp(self, other: LogVal) -> std::cmp::Ordering {
        if self.is_zero() && other.is_zero() {
            return std::cmp::Ordering::Equal;
        }
        self.ln_abs
            .partial_cmp(&other.ln_abs)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

impl std::ops::Neg for LogVal {
    type Output = LogVal;
    fn neg(self) -> LogVal {
        LogVal::new(-self.sign, self.ln_abs)
    }
}

impl std::ops::Mul for LogVal {
    type Output = LogVal;
    fn mul(self, other: LogVal) -> LogVal {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        LogVal::new(self.sign * other.sign, self.ln_abs + other.ln_abs)
    }
}

impl std::ops::Add for LogVal {
    type Output = LogVal;
    fn add(self, other: LogVal) -> LogVal {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        // Accumulate relative to the larger magnitude.
        let (hi, lo) = if self.ln_abs >= other.ln_abs {
            (self, other)
        } else {
            (other, self)
        };
        let r = (lo.ln_abs - hi.ln_abs).exp();
        let t = if hi.sign == lo.sign { 1.0 + r } else { 1.0 - r };
        if t == 0.0 {
            Self::ZERO
        } else if t > 0.0 {
            LogVal::new(hi.sign, hi.ln_abs + t.ln())
        } else {
            LogVal::new(-hi.sign, hi.ln_abs + (-t).ln())
        }
    }
}

impl std::ops::Sub for LogVal {
    type Output = LogVal;
    fn sub(self, other: LogVal) -> LogVal {
        self + (-other)
    }
}

/// Running signed sum in log space.
///
/// Terms far below the current magnitude are absorbed into a reported bound
/// instead of being added, so long convolution tails cost nothing.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    acc: LogVal,
    /// Natural-log bound on the total magnitude of dropped terms.
    dropped_ln: f64,
}

impl LogSum {
    /// `drop_margin` is the ln-gap below the running magnitude at which terms
    /// may be dropped (e.g. `115.0` for ~50 decades).
    pub fn new() -> Self {
        LogSum {
            acc: LogVal::ZERO,
            dropped_ln: f64::NEG_INFINITY,
        }
    }

    pub fn add(&mut self, term: LogVal) {
        self.acc = self.acc + term;
    }

    /// Adds `term` unless it is negligible; returns `true` if it was dropped.
    pub fn add_or_drop(&mut self, term: LogVal, drop_margin: f64) -> bool {
        if term.is_zero() {
            return true;
        }
        if !self.acc.is_zero() && term.ln_abs < self.acc.ln_abs - drop_margin {
            self.dropped_ln = logaddexp(self.dropped_ln, term.ln_abs);
            return true;
        }
        self.acc = self.acc + term;
        false
    }

    pub fn value(&self) -> LogVal {
        self.acc
    }

    pub fn dropped_bound_ln(&self) -> f64 {
        self.dropped_ln
    }
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_ops() {
        let a = LogVal::from_f64(3.5);
        let b = LogVal::from_f64(-1.25);
        assert!(((a + b).to_f64() - 2.25).abs() < 1e-14);
        assert!(((a * b).to_f64() + 4.375).abs() < 1e-14);
        assert!(((a - b).to_f64() - 4.75).abs() < 1e-14);
        assert_eq!(LogVal::from_f64(0.0), LogVal::ZERO);
        assert!((LogVal::from_f64(2.0) - LogVal::from_f64(2.0)).is_zero());
    }

    #[test]
    fn huge_magnitudes() {
        let big = LogVal::new(1, 5.0e5); // e^{500000}
        let small = LogVal::new(1, 4.0e5);
        let sum = big + small;
        assert_eq!(sum.sign, 1);
        assert!((sum.ln_abs - 5.0e5).abs() < 1e-9);
        assert!(big.to_f64().is_infinite());
    }

    #[test]
    fn logsum_dropping_is_bounded() {
        let mut s = LogSum::new();
        s.add(LogVal::from_f64(1.0));
        let dropped = s.add_or_drop(LogVal::from_f64(1e-60), 115.0);
        assert!(dropped);
        assert!(s.dropped_bound_ln() <= (1e-59f64).ln());
        assert!((s.value().to_f64() - 1.0).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn add_matches_f64(x in -1.0e3f64..1.0e3, y in -1.0e3f64..1.0e3) {
            let got = (LogVal::from_f64(x) + LogVal::from_f64(y)).to_f64();
            let want = x + y;
            proptest::prop_assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()));
        }
    }
}
