//! Normwise backward-error criterion
//!
//! ```text
//! min_x  ‖Ax − b‖ / (‖A‖‖x‖ + ‖b‖)
//! ```
//!
//! For `‖b‖ > 0` and an inconsistent system the squared optimal value is
//! `t* = 1 / min F(λ)` over the admissible interval, where
//!
//! ```text
//! F(λ) = ‖A‖²/λ + ‖b‖² / (‖b‖² − bᵀA(AᵀA − λI)⁺Aᵀb)
//! ```
//!
//! is convex. The optimal `x` lies on the sphere `‖x‖² = z*` with
//! `z* = (t*‖A‖‖b‖ / (λ* − t*‖A‖²))²` and is recovered from the minimizer
//! and maximizer of `‖Ax − b‖²` on that sphere.

use alloc::format;
use alloc::vec::Vec;

use crate::certificates::{be_certificate, CertificateReport};
use crate::error::{domain, invalid, Error, Result};
use crate::linalg::{self, eigh, Matrix, SymEig, SymMatrix};
use crate::prs::DualEval;
use crate::roots::{decreasing_root, Bracket};
use crate::trs::{min_sphere, HARD_CASE_TOL};
use crate::SolverOptions;

/// `λ_min(AᵀA) ≤ DEGENERATE_TOL·λ_max(AᵀA)` is treated as rank deficiency.
const DEGENERATE_TOL: f64 = 1e-12;
const CONSISTENT_TOL: f64 = 1e-10;
const ENDPOINT_TOL: f64 = 1e-8;
const ALPHA_TOL: f64 = 1e-9;
const ALPHA_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct BeProblem {
    pub a: Matrix,
    pub b: Vec<f64>,
}

impl BeProblem {
    pub fn new(a: Matrix, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(invalid("b must have one entry per row of A"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(invalid("b has non-finite entries"));
        }
        if a.max_abs() == 0.0 {
            return Err(invalid("A must be nonzero"));
        }
        Ok(Self { a, b })
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        linalg::sub(&self.a.mul_vec(x), &self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BePath {
    LinearSystem,
    ZeroB,
    Interpolated,
    EndpointMin,
    EndpointMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeSolution {
    /// Optimal value of the (un-squared) ratio.
    pub ratio: f64,
    /// Optimal squared ratio.
    pub t_star: f64,
    pub lambda_star: f64,
    pub z_star: f64,
    pub x: Vec<f64>,
    pub alpha: Option<f64>,
    pub path: BePath,
    pub iterations: usize,
    /// `w*` used for the certificate.
    pub w_star: f64,
    pub certificate: CertificateReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub x: Vec<f64>,
    pub alpha: Option<f64>,
    pub path: BePath,
}

/// `‖Ax − b‖ / (‖A‖‖x‖ + ‖b‖)`
pub fn evaluate_ratio(prob: &BeProblem, x: &[f64]) -> Result<f64> {
    ratio_with_norm(prob, x, linalg::spectral_norm(&prob.a))
}

fn ratio_with_norm(prob: &BeProblem, x: &[f64], norm_a: f64) -> Result<f64> {
    let den = norm_a * linalg::norm(x) + linalg::norm(&prob.b);
    if den <= 0.0 {
        return Err(domain("ratio undefined at x = 0 when b = 0"));
    }
    Ok((linalg::norm(&prob.residual(x)) / den).min(1.0))
}

/// Least-squares solution via the pseudoinverse of `AᵀA`, refined once.
fn least_squares(prob: &BeProblem, eig: &SymEig) -> Vec<f64> {
    let mut x = eig.apply_shifted_pinv(0.0, &prob.a.tr_mul_vec(&prob.b), 1e-12);
    for _ in 0..2 {
        let r = linalg::sub(&prob.b, &prob.a.mul_vec(&x));
        let dx = eig.apply_shifted_pinv(0.0, &prob.a.tr_mul_vec(&r), 1e-12);
        linalg::axpy(1.0, &dx, &mut x);
    }
    x
}

/// The convex dual `F(λ)` of one instance.
///
/// The denominator `D(λ) = ‖b‖² − bᵀA(AᵀA − λI)⁺Aᵀb` is evaluated as
/// `‖r_ls‖² − λ Σ γᵢ² / (σᵢ²(σᵢ² − λ))`, which avoids the cancellation of
/// the direct form for nearly consistent systems.
#[derive(Debug, Clone)]
pub struct BeDual {
    norm_a_sq: f64,
    b_norm_sq: f64,
    res_sq: f64,
    sigma_sq: Vec<f64>,
    gaps: Vec<f64>,
    gamma: Vec<f64>,
    lambda_min: f64,
    open: bool,
    right: f64,
    right_closed: bool,
}

impl BeDual {
    pub fn new(prob: &BeProblem, hard_case_tol: f64) -> Result<Self> {
        let eig = eigh(&prob.a.gram())?;
        Self::with_eig(prob, &eig, hard_case_tol)
    }

    fn with_eig(prob: &BeProblem, eig: &SymEig, hard_case_tol: f64) -> Result<Self> {
        let norm_a_sq = eig.max_eigenvalue();
        let lambda_min = eig.min_eigenvalue().max(0.0);
        let g = prob.a.tr_mul_vec(&prob.b);
        let mut gamma = eig.coords(&g);
        let open = !linalg::range_membership(eig, &g, hard_case_tol);
        if !open {
            for v in gamma.iter_mut().take(eig.min_cluster_len()) {
                *v = 0.0;
            }
        }
        let x_ls = least_squares(prob, eig);
        let res_sq = linalg::norm_sq(&prob.residual(&x_ls));
        let sigma_sq: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
        let gaps = sigma_sq.iter().map(|s| s - lambda_min).collect();
        let mut dual = Self {
            norm_a_sq,
            b_norm_sq: linalg::norm_sq(&prob.b),
            res_sq,
            sigma_sq,
            gaps,
            gamma,
            lambda_min,
            open,
            right: lambda_min,
            right_closed: false,
        };
        if lambda_min > DEGENERATE_TOL * norm_a_sq && res_sq > 0.0 {
            dual.locate_right_end();
        } else {
            dual.right = 0.0;
        }
        Ok(dual)
    }

    fn locate_right_end(&mut self) {
        if !self.open && self.denominator(self.lambda_min) > 0.0 {
            self.right = self.lambda_min;
            self.right_closed = true;
            return;
        }
        // D is decreasing on (0, λ_min) with D(0) > 0 and D → −∞ (open
        // branch) or D(λ_min) ≤ 0 (range branch).
        let (mut lo, mut hi) = (0.0, self.lambda_min);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.denominator(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.right = lo;
        self.right_closed = false;
    }

    /// Admissible interval `(0, right)` or `(0, right]`.
    pub fn interval(&self) -> (f64, f64, bool) {
        (0.0, self.right, self.right_closed)
    }

    pub fn is_open_branch(&self) -> bool {
        self.open
    }

    fn spread(&self, lambda: f64) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        // (γᵢ², σᵢ², σᵢ² − λ)
        let u = self.lambda_min - lambda;
        self.gamma
            .iter()
            .zip(&self.sigma_sq)
            .zip(&self.gaps)
            .filter(|((g, _), _)| **g != 0.0)
            .map(move |((g, s), d)| (g * g, *s, d + u))
    }

    fn denominator(&self, lambda: f64) -> f64 {
        let tail: f64 = self.spread(lambda).map(|(g2, s, d)| g2 / (s * d)).sum();
        self.res_sq - lambda * tail
    }

    /// `(F, F′, F″)` at an admissible λ.
    fn eval_all(&self, lambda: f64) -> (f64, f64, f64) {
        let den = self.denominator(lambda);
        let (mut w1, mut w2) = (0.0, 0.0);
        for (g2, _, d) in self.spread(lambda) {
            w1 += g2 / (d * d);
            w2 += 2.0 * g2 / (d * d * d);
        }
        let (a2, b2) = (self.norm_a_sq, self.b_norm_sq);
        let f = a2 / lambda + b2 / den;
        let df = -a2 / (lambda * lambda) + b2 * w1 / (den * den);
        let d2f = 2.0 * a2 / (lambda * lambda * lambda) + b2 * (w2 / (den * den) + 2.0 * w1 * w1 / (den * den * den));
        (f, df, d2f)
    }

    fn check(&self, lambda: f64) -> Result<()> {
        let inside = lambda > 0.0 && (lambda < self.right || (self.right_closed && lambda <= self.right));
        if !inside {
            return Err(domain(format!(
                "lambda {lambda:e} outside the admissible interval (0, {:e}{}",
                self.right,
                if self.right_closed { "]" } else { ")" }
            )));
        }
        if self.denominator(lambda) <= 0.0 {
            return Err(domain("denominator ‖b‖² − bᵀA(AᵀA − λI)⁺Aᵀb is not positive"));
        }
        Ok(())
    }

    pub fn value(&self, lambda: f64) -> Result<f64> {
        self.check(lambda)?;
        Ok(self.eval_all(lambda).0)
    }

    pub fn eval(&self, lambda: f64) -> Result<DualEval> {
        self.check(lambda)?;
        let (value, derivative, _) = self.eval_all(lambda);
        Ok(DualEval { value, derivative })
    }
}

/// `F(λ)` and `F′(λ)` of the convex dual.
pub fn be_dual_value(lambda: f64, prob: &BeProblem) -> Result<DualEval> {
    BeDual::new(prob, HARD_CASE_TOL)?.eval(lambda)
}

pub fn solve_be(prob: &BeProblem, opts: &SolverOptions) -> Result<BeSolution> {
    let eig = eigh(&prob.a.gram())?;
    let norm_a_sq = eig.max_eigenvalue();
    let norm_a = libm::sqrt(norm_a_sq);
    let b_norm = linalg::norm(&prob.b);
    let b_norm_sq = b_norm * b_norm;

    if b_norm == 0.0 {
        let x = eig.vector(0);
        let ratio = linalg::norm(&prob.a.mul_vec(&x)) / norm_a;
        let lambda = eig.min_eigenvalue().max(0.0);
        let certificate = be_certificate(prob, lambda, 0.0, opts.psd_tol)?;
        return Ok(BeSolution {
            ratio,
            t_star: ratio * ratio,
            lambda_star: lambda,
            z_star: 1.0,
            x,
            alpha: None,
            path: BePath::ZeroB,
            iterations: 0,
            w_star: 0.0,
            certificate,
        });
    }

    let x_ls = least_squares(prob, &eig);
    if linalg::norm(&prob.residual(&x_ls)) <= CONSISTENT_TOL * (1.0 + b_norm) {
        let certificate = be_certificate(prob, 0.0, b_norm_sq, opts.psd_tol)?;
        return Ok(BeSolution {
            ratio: 0.0,
            t_star: 0.0,
            lambda_star: 0.0,
            z_star: linalg::norm_sq(&x_ls),
            x: x_ls,
            alpha: None,
            path: BePath::LinearSystem,
            iterations: 0,
            w_star: b_norm_sq,
            certificate,
        });
    }

    let dual = BeDual::with_eig(prob, &eig, opts.hard_case_tol)?;
    if dual.right <= 0.0 {
        return Err(Error::DegenerateInstance(format!(
            "λ_min(AᵀA) = {:e} leaves no admissible multiplier; the infimum is not attained",
            eig.min_eigenvalue()
        )));
    }

    let boundary_optimal = dual.right_closed && dual.eval_all(dual.right).1 <= 0.0;
    let (lambda_star, iterations) = if boundary_optimal {
        (dual.right, 0)
    } else {
        let out = decreasing_root(
            |l| {
                let (_, df, d2f) = dual.eval_all(l);
                (-df, -d2f)
            },
            |l, mdf| {
                let f = dual.eval_all(l).0;
                (l * mdf).abs() <= opts.dual_tol * f
            },
            Bracket { lo: 0.0, hi: dual.right },
            0.5 * dual.right,
            opts.max_iter,
        );
        if !out.converged {
            return Err(Error::NoConvergence { iterations: out.iterations, best_lambda: out.x });
        }
        (out.x, out.iterations)
    };

    let f_star = dual.eval_all(lambda_star).0;
    let t_star = 1.0 / f_star;
    let gap = lambda_star - t_star * norm_a_sq;
    let u = t_star * norm_a * b_norm / gap;
    let z_star = u * u;

    let rec = recover_with(prob, &eig, norm_a, t_star, z_star)?;
    let w_star = b_norm_sq - t_star * b_norm_sq - t_star * t_star * norm_a_sq * b_norm_sq / gap;
    let certificate = be_certificate(prob, lambda_star, w_star, opts.psd_tol)?;
    Ok(BeSolution {
        ratio: libm::sqrt(t_star),
        t_star,
        lambda_star,
        z_star,
        x: rec.x,
        alpha: rec.alpha,
        path: rec.path,
        iterations,
        w_star,
        certificate,
    })
}

/// `√z·(x_m + α(x_M − x_m)) / ‖x_m + α(x_M − x_m)‖`; α is nudged by `1e-12`
/// if the combination vanishes (only possible when `x_m = −x_M`).
pub(crate) fn interpolate(x_min: &[f64], x_max: &[f64], alpha: f64, z: f64) -> Vec<f64> {
    let combo = |a: f64| -> Vec<f64> { x_min.iter().zip(x_max).map(|(m, mm)| m + a * (mm - m)).collect() };
    let mut v = combo(alpha);
    if linalg::norm(&v) == 0.0 {
        v = combo(alpha + 1e-12);
    }
    linalg::scaled(libm::sqrt(z) / linalg::norm(&v), &v)
}

/// Finds `x` with `‖x‖² = z*` and `‖Ax − b‖² = t*(‖A‖√z* + ‖b‖)²`.
pub fn recover_x_be(prob: &BeProblem, t_star: f64, z_star: f64) -> Result<Recovery> {
    if !(t_star > 0.0 && t_star < 1.0) {
        return Err(invalid("t_star must lie in (0, 1)"));
    }
    if !(z_star > 0.0 && z_star.is_finite()) {
        return Err(invalid("z_star must be positive"));
    }
    let eig = eigh(&prob.a.gram())?;
    let norm_a = libm::sqrt(eig.max_eigenvalue());
    recover_with(prob, &eig, norm_a, t_star, z_star)
}

fn recover_with(prob: &BeProblem, eig: &SymEig, norm_a: f64, t_star: f64, z_star: f64) -> Result<Recovery> {
    let g = prob.a.gram();
    let c = linalg::scaled(-2.0, &prob.a.tr_mul_vec(&prob.b));
    let target = t_star * {
        let d = norm_a * libm::sqrt(z_star) + linalg::norm(&prob.b);
        d * d
    };
    let resid_sq = |x: &[f64]| linalg::norm_sq(&prob.residual(x));
    let endpoint_tol = ENDPOINT_TOL * (1.0 + target);

    let x_min = min_sphere(&g, eig, &c, z_star, HARD_CASE_TOL).x;
    let g0 = resid_sq(&x_min) - target;
    if g0.abs() <= endpoint_tol {
        return Ok(Recovery { x: x_min, alpha: None, path: BePath::EndpointMin });
    }

    let neg_g: SymMatrix = g.scale(-1.0);
    let neg_eig = eigh(&neg_g)?;
    let x_max = min_sphere(&neg_g, &neg_eig, &linalg::scaled(-1.0, &c), z_star, HARD_CASE_TOL).x;
    let g1 = resid_sq(&x_max) - target;
    if g1.abs() <= endpoint_tol {
        return Ok(Recovery { x: x_max, alpha: None, path: BePath::EndpointMax });
    }
    if !(g0 < 0.0 && g1 > 0.0) {
        return Err(Error::InternalInconsistency(format!(
            "no sign change on the interpolation path: g(0) = {g0:e}, g(1) = {g1:e}"
        )));
    }

    let point = |alpha: f64| interpolate(&x_min, &x_max, alpha, z_star);
    let (mut lo, mut hi) = (0.0, 1.0);
    let tol = ALPHA_TOL * (1.0 + target);
    let mut alpha = 0.5;
    for _ in 0..ALPHA_MAX_ITER {
        alpha = 0.5 * (lo + hi);
        let val = resid_sq(&point(alpha)) - target;
        if val.abs() <= tol {
            break;
        }
        if val < 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
    }
    Ok(Recovery { x: point(alpha), alpha: Some(alpha), path: BePath::Interpolated })
}
