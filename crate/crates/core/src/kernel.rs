//! Construction and evaluation of the kernel `k(x) = c(x)/sqrt(x)`.
//!
//! The modulation `c` is built from a positive background level plus two
//! triangular bumps centered at `u0 = 2` and `u1 = 2*pi - 2` inside the base
//! period `[1, lambda)`, extended to all of `(0, inf)` by multiplicative
//! `lambda`-periodicity (`c(lambda x) = c(x)` with `lambda = L^2`). The bump
//! centers sit where `cos < 0` and `sin` has opposite signs, which is what
//! later lets the bump heights steer the Laplace transform onto `-1`.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// First bump center.
pub const U0: f64 = 2.0;
/// Second bump center, `2*pi - 2`.
pub const U1: f64 = 2.0 * std::f64::consts::PI - 2.0;

/// The free parameters of the kernel; everything else is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelParams {
    #[serde(rename = "L")]
    pub l: u32,
    pub delta: f64,
    pub epsilon: f64,
    pub b0: f64,
    pub b1: f64,
}

/// A validated kernel specification.
///
/// Immutable after construction; all evaluation methods are pure, so values
/// may be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    l: u32,
    lambda: f64,
    u0: f64,
    u1: f64,
    delta: f64,
    epsilon: f64,
    b0: f64,
    b1: f64,
    a: f64,
    b: f64,
    ln_lambda: f64,
}

impl KernelSpec {
    /// Validating constructor; every invariant of the construction is checked
    /// here so that downstream modules can assume them.
    pub fn new(l: u32, delta: f64, epsilon: f64, b0: f64, b1: f64) -> Result<Self> {
        if l < 3 {
            return Err(Error::InvalidKernel(format!("L = {l} must be >= 3")));
        }
        let lambda = (l as f64) * (l as f64);
        if lambda <= U1 + 1.0 {
            return Err(Error::InvalidKernel(format!(
                "lambda = {lambda} must exceed u1 + 1 = {}",
                U1 + 1.0
            )));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(delta) || !positive(epsilon) || !positive(b0) || !positive(b1) {
            return Err(Error::InvalidKernel(
                "delta, epsilon, b0, b1 must all be positive".into(),
            ));
        }
        // Support intervals must be disjoint and inside (1, lambda).
        if U0 - delta <= 1.0 {
            return Err(Error::InvalidKernel(format!(
                "delta = {delta} pushes the first bump below 1"
            )));
        }
        if U0 + delta >= U1 - delta {
            return Err(Error::InvalidKernel(format!(
                "delta = {delta} makes the bump supports overlap"
            )));
        }
        if U1 + delta >= lambda {
            return Err(Error::InvalidKernel(format!(
                "delta = {delta} pushes the second bump beyond lambda = {lambda}"
            )));
        }
        // Sign conditions on the supports: cos < 0 on both, sin > 0 on the
        // first, sin < 0 on the second. Checked by sampling 64 interior
        // points per interval plus the endpoints.
        let check = |lo: f64, hi: f64, f: fn(f64) -> f64, want_neg: bool, what: &str| -> Result<()> {
            for i in 0..=65 {
                let x = lo + (hi - lo) * i as f64 / 65.0;
                let v = f(x);
                if (want_neg && v >= 0.0) || (!want_neg && v <= 0.0) {
                    return Err(Error::InvalidKernel(format!(
                        "sign condition {what} fails at x = {x} (value {v})"
                    )));
                }
            }
            Ok(())
        };
        check(U0 - delta, U0 + delta, f64::cos, true, "cos < 0 on J0")?;
        check(U1 - delta, U1 + delta, f64::cos, true, "cos < 0 on J1")?;
        check(U0 - delta, U0 + delta, f64::sin, false, "sin > 0 on J0")?;
        check(U1 - delta, U1 + delta, |x| -x.sin(), false, "sin < 0 on J1")?;
        Ok(KernelSpec {
            l,
            lambda,
            u0: U0,
            u1: U1,
            delta,
            epsilon,
            b0,
            b1,
            a: epsilon,
            b: epsilon + b0 + b1,
            ln_lambda: lambda.ln(),
        })
    }

    pub fn from_params(p: &KernelParams) -> Result<Self> {
        Self::new(p.l, p.delta, p.epsilon, p.b0, p.b1)
    }

    pub fn params(&self) -> KernelParams {
        KernelParams {
            l: self.l,
            delta: self.delta,
            epsilon: self.epsilon,
            b0: self.b0,
            b1: self.b1,
        }
    }

    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn u(&self, j: usize) -> f64 {
        if j == 0 {
            self.u0
        } else {
            self.u1
        }
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn bump_height(&self, j: usize) -> f64 {
        if j == 0 {
            self.b0
        } else {
            self.b1
        }
    }
    /// Lower comparability constant: `a / sqrt(x) <= k(x)`.
    pub fn lower(&self) -> f64 {
        self.a
    }
    /// Upper comparability constant: `k(x) <= b / sqrt(x)`.
    pub fn upper(&self) -> f64 {
        self.b
    }

    /// Reduces `x > 0` to the base period: returns `(y, m)` with
    /// `y = x / lambda^m in [1, lambda)`.
    ///
    /// The float log can land one period off exactly at powers of `lambda`,
    /// so the result is corrected by +-1 afterwards.
    pub fn reduce(&self, x: f64) -> Result<(f64, i32)> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Domain(format!("x = {x} must be positive")));
        }
        let mut m = (x.ln() / self.ln_lambda).floor() as i32;
        let mut y = x / pow_i(self.lambda, m);
        if y < 1.0 {
            m -= 1;
            y = x / pow_i(self.lambda, m);
        } else if y >= self.lambda {
            m += 1;
            y = x / pow_i(self.lambda, m);
        }
        // Clamp residual rounding at the seam.
        if y < 1.0 {
            y = 1.0;
        }
        Ok((y, m))
    }

    fn tent(&self, j: usize, y: f64) -> f64 {
        let u = self.u(j);
        (1.0 - (y - u).abs() / self.delta).max(0.0)
    }

    /// Evaluates the periodically extended bump `psi_j` at `x > 0`.
    /// Piecewise linear with peak 1 at every periodic copy of `u_j`.
    pub fn eval_psi(&self, j: usize, x: f64) -> Result<f64> {
        assert!(j < 2, "bump index must be 0 or 1");
        let (y, _) = self.reduce(x)?;
        Ok(self.tent(j, y))
    }

    /// Evaluates the modulation `c(x) = epsilon + b0 psi0(x) + b1 psi1(x)`.
    pub fn eval_c(&self, x: f64) -> Result<f64> {
        let (y, _) = self.reduce(x)?;
        Ok(self.epsilon + self.b0 * self.tent(0, y) + self.b1 * self.tent(1, y))
    }

    /// Evaluates the kernel `k(x) = c(x)/sqrt(x)`.
    pub fn eval_k(&self, x: f64) -> Result<f64> {
        Ok(self.eval_c(x)? / x.sqrt())
    }

    /// `int tent_j(y) y^{q} dy` over the support, exact.
    pub(crate) fn tent_moment(&self, j: usize, q: f64) -> f64 {
        let u = self.u(j);
        let d = self.delta;
        // left piece: (1 - u/d) + y/d ; right piece: (1 + u/d) - y/d
        let anti = |a: f64, b: f64, y: f64| a * y.powf(q + 1.0) / (q + 1.0) + b * y.powf(q + 2.0) / (q + 2.0);
        let left = anti(1.0 - u / d, 1.0 / d, u) - anti(1.0 - u / d, 1.0 / d, u - d);
        let right = anti(1.0 + u / d, -1.0 / d, u + d) - anti(1.0 + u / d, -1.0 / d, u);
        left + right
    }
}

fn pow_i(base: f64, e: i32) -> f64 {
    base.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spec() -> KernelSpec {
        KernelSpec::new(9, 0.25, 0.05, 1.5, 2.5).unwrap()
    }

    #[test]
    fn bump_peak_and_feet() {
        let s = spec();
        assert_eq!(s.eval_psi(0, U0).unwrap(), 1.0);
        assert_eq!(s.eval_psi(0, U0 + 0.25).unwrap(), 0.0);
        assert_eq!(s.eval_psi(0, U0 - 0.25).unwrap(), 0.0);
        // periodicity: psi_j(lambda * u_j) = 1
        let v = s.eval_psi(1, s.lambda() * U1).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modulation_values() {
        let s = spec();
        assert!((s.eval_c(1.0).unwrap() - 0.05).abs() < 1e-15);
        assert!((s.eval_c(U0).unwrap() - 1.55).abs() < 1e-12);
        let x = s.lambda().powi(3) * U1;
        assert!((s.eval_c(x).unwrap() - 2.55).abs() < 1e-9);
    }

    #[test]
    fn kernel_values() {
        let s = spec();
        assert!((s.eval_k(1.0).unwrap() - 0.05).abs() < 1e-15);
        // x = 4 is outside both supports for delta = 0.25: c = epsilon
        assert!((s.eval_k(4.9).unwrap() - 0.05 / 4.9f64.sqrt()).abs() < 1e-14);
        // independent scalar computation of (epsilon + b0)/sqrt(u0)
        let want = (0.05 + 1.5) / U0.sqrt();
        assert!((s.eval_k(U0).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        let s = spec();
        assert!(s.eval_c(0.0).is_err());
        assert!(s.eval_c(-2.0).is_err());
        assert!(s.eval_k(f64::NAN).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelSpec::new(2, 0.25, 0.05, 1.0, 1.0).is_err());
        assert!(KernelSpec::new(9, 1.2, 0.05, 1.0, 1.0).is_err()); // bump under 1
        assert!(KernelSpec::new(9, 0.25, 0.0, 1.0, 1.0).is_err());
        assert!(KernelSpec::new(9, 0.25, 0.05, -1.0, 1.0).is_err());
        // delta large enough to violate the sin/cos sign conditions
        assert!(KernelSpec::new(9, 1.15, 0.05, 1.0, 1.0).is_err());
    }

    #[test]
    fn multiplicative_periodicity_random() {
        let s = spec();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..10_000 {
            let x = 10f64.powf(rng.gen_range(-3.0..3.0));
            let c = s.eval_c(x).unwrap();
            let m = rng.gen_range(-3i32..=3);
            let cx = s.eval_c(x * s.lambda().powi(m)).unwrap();
            assert!(
                (cx - c).abs() <= 1e-12 * c,
                "periodicity broke at x={x}, m={m}: {c} vs {cx}"
            );
        }
    }

    #[test]
    fn comparability_random() {
        let s = spec();
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        for _ in 0..10_000 {
            let x = 10f64.powf(rng.gen_range(-3.0..3.0));
            // The modulation itself obeys the bounds exactly by construction.
            let c = s.eval_c(x).unwrap();
            assert!(c >= s.lower() && c <= s.upper());
            // sqrt(x) * k(x) re-rounds twice; allow exactly that.
            let v = x.sqrt() * s.eval_k(x).unwrap();
            assert!((v - c).abs() <= 2.0 * f64::EPSILON * c);
        }
    }

    #[test]
    fn continuity_at_seams() {
        let s = spec();
        // Lipschitz constant of the base profile is max(b0, b1)/delta.
        let lip = (s.bump_height(0).max(s.bump_height(1))) / s.delta();
        for m in -2i32..=2 {
            let seam = s.lambda().powi(m);
            for k in 1..=6 {
                let h = 10f64.powi(-k);
                let d = (s.eval_c(seam * (1.0 + h)).unwrap() - s.eval_c(seam * (1.0 - h)).unwrap())
                    .abs();
                assert!(d <= lip * 2.0 * h * s.lambda() + 1e-12, "m={m} h={h} d={d}");
            }
        }
    }

    #[test]
    fn disjoint_supports() {
        let s = spec();
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..10_000 {
            let x = 10f64.powf(rng.gen_range(-2.0..2.0));
            let p = s.eval_psi(0, x).unwrap() * s.eval_psi(1, x).unwrap();
            assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn tent_moment_matches_quadrature() {
        let s = spec();
        for j in 0..2 {
            for &q in &[-0.5, 0.5, 1.5] {
                let want = crate::brute::simpson(
                    |y| s.tent(j, y) * y.powf(q),
                    s.u(j) - s.delta(),
                    s.u(j) + s.delta(),
                    20_000,
                );
                let got = s.tent_moment(j, q);
                assert!((got - want).abs() < 1e-10, "j={j} q={q}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn params_roundtrip() {
        let s = spec();
        let p = s.params();
        let s2 = KernelSpec::from_params(&p).unwrap();
        assert_eq!(s, s2);
        let json = serde_json::to_string(&p).unwrap();
        let p2: KernelParams = serde_json::from_str(&json).unwrap();
        assert_eq!(p, p2);
    }
}
