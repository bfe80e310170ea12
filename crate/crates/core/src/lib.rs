//! Global solvers for two nonconvex, non-quadratic problems that admit a
//! hidden univariate convex dual:
//!
//! * the p-regularized subproblem `min xᵀAx + bᵀx + ρ‖x‖^p` with `p > 2`
//!   ([`prs`]);
//! * the normwise backward-error criterion
//!   `min ‖Ax − b‖ / (‖A‖‖x‖ + ‖b‖)` ([`backward_error`]).
//!
//! Both solvers maximize (or minimize) a one-dimensional dual by safeguarded
//! Newton iteration, recover a primal point through trust-region
//! subproblems ([`trs`]) and attach a positive-semidefinite block-matrix
//! certificate ([`certificates`]) proving the reported value is a global
//! lower bound. Brute-force reference solvers live in [`oracle`].
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod backward_error;
pub mod certificates;
mod error;
pub mod linalg;
pub mod oracle;
pub mod prs;
mod roots;
pub mod trs;

pub use error::{Error, Result};

/// Knobs shared by the dual solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// Maximum number of Newton/bisection steps on the dual.
    pub max_iter: usize,
    /// Relative stationarity tolerance on the dual derivative.
    pub dual_tol: f64,
    /// Relative tolerance used for the PSD verdict of the certificate.
    pub psd_tol: f64,
    /// Projection threshold deciding the easy/hard branch.
    pub hard_case_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            dual_tol: 1e-10,
            psd_tol: 1e-8,
            hard_case_tol: 1e-8,
        }
    }
}
