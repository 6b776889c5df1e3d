//! Numerical machinery for scaled Volterra equations of the second kind with
//! weakly singular kernels of the form `k(x) = c(x)/sqrt(x)`, where `c` is a
//! strictly positive, multiplicatively periodic modulation.
//!
//! The crate builds such a kernel from a small parameter set, calibrates the
//! bump heights so that the Laplace transform `K` of `k` satisfies
//! `K(1+i) = -1`, catalogs the zeros of `H = 1 + K` in the right half-plane,
//! solves the scaled equations `f_n + n k*f_n = g` by product integration,
//! and evaluates the residue expansion that makes `f_{L^m}(x0)` blow up along
//! the geometric subsequence `n_m = L^m`.
//!
//! The solver alone also handles the classical sanity cases:
//!
//! ```
//! use abel_volterra::volterra::{solve, Forcing, KernelModel, Scheme, SolveOptions};
//!
//! // k(x) = x with g = 1: the solutions are f_n(x) = cos(sqrt(n) x).
//! let grid = solve(
//!     &KernelModel::Linear,
//!     Forcing::One,
//!     &SolveOptions {
//!         n: 4.0,
//!         x_end: std::f64::consts::PI,
//!         h: std::f64::consts::PI / 2048.0,
//!         scheme: Scheme::ProductTrapezoidal,
//!         log_domain: None,
//!     },
//! )
//! .unwrap();
//! let i = grid.index_of(1.0);
//! let want = (2.0 * grid.x_at(i)).cos();
//! assert!((grid.values.f64_at(i) - want).abs() < 1e-5);
//! ```

pub mod artifact;
pub mod calibration;
pub mod kernel;
pub mod laplace;
pub mod logval;
pub mod quad;
pub mod residue;
pub mod volterra;
pub mod zeros;

pub mod acceptance;

#[cfg(test)]
pub(crate) mod brute;

pub use num_complex::Complex64;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument was outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A truncation/quadrature error bound exceeded the requested tolerance.
    #[error("accuracy error: achieved bound {achieved:e} exceeds tolerance {requested:e} ({context})")]
    Accuracy {
        achieved: f64,
        requested: f64,
        context: String,
    },

    /// Kernel parameter validation failed.
    #[error("invalid kernel parameters: {0}")]
    InvalidKernel(String),

    /// Calibration could not be completed.
    #[error("calibration failure: {0}")]
    Calibration(String),

    /// The zero-free boundary certification failed.
    #[error("certification failure: {0}")]
    Certification(String),

    /// A winding-number computation could not resolve the boundary phase.
    #[error("boundary near zero: {0}")]
    BoundaryNearZero(String),

    /// Newton refinement of a zero did not converge.
    #[error("zero refinement failure: {0}")]
    Refinement(String),

    /// The two multiplicity estimators disagree.
    #[error("multiplicity ambiguous: {0}")]
    MultiplicityAmbiguous(String),

    /// A requested computation does not fit in the configured resource budget.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Search exhausted without meeting the target condition.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// Malformed or inconsistent artifact/config data.
    #[error("format error: {0}")]
    Format(String),

    /// A required upstream artifact is missing.
    #[error("dependency error: {0}")]
    Dependency(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
