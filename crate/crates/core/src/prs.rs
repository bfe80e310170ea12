//! Generalized p-regularized subproblem
//!
//! ```text
//! min_x  h(x) = xᵀAx + bᵀx + ρ‖x‖^p,   p > 2, ρ > 0.
//! ```
//!
//! Lifting `z = ‖x‖²` and dualizing `xᵀx ≤ z` gives the concave univariate
//! dual
//!
//! ```text
//! d(λ) = Φ_ρ(λ) − bᵀ(A + λI)⁺b / 4,   λ ≥ max(0, −λ_min(A)),
//! Φ_ρ(λ) = min_{z ≥ 0} ρ z^{p/2} − λz,
//! ```
//!
//! whose maximum equals the global minimum of `h`. The maximizer `λ*` gives
//! `z* = (2λ*/(pρ))^{2/(p−2)}`, and `x*` solves `2(A + λ*I)x + b = 0`,
//! `‖x‖² = z*`.

use alloc::format;
use alloc::vec::Vec;

use crate::certificates::{prs_certificate, CertificateReport};
use crate::error::{domain, invalid, Error, Result};
use crate::linalg::{self, eigh, SymEig, SymMatrix};
use crate::roots::{decreasing_root, Bracket};
use crate::trs::min_sphere;
use crate::SolverOptions;

#[derive(Debug, Clone, PartialEq)]
pub struct PrsProblem {
    pub a: SymMatrix,
    pub b: Vec<f64>,
    pub p: f64,
    pub rho: f64,
}

impl PrsProblem {
    pub fn new(a: SymMatrix, b: Vec<f64>, p: f64, rho: f64) -> Result<Self> {
        if b.len() != a.dim() {
            return Err(invalid("b must have the same dimension as A"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(invalid("b has non-finite entries"));
        }
        if !(p.is_finite() && p > 2.0) {
            return Err(invalid("p must be finite and strictly greater than 2"));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid("rho must be finite and positive"));
        }
        Ok(Self { a, b, p, rho })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        evaluate_objective(self, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PrsCase {
    /// Dual maximizer strictly inside the domain.
    Easy,
    /// Dual maximizer at `λ* = −λ_min(A)`; the solution carries an
    /// eigenvector component.
    Hard,
    /// `A ⪰ 0`; the problem is convex.
    Convex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrsSolution {
    /// Dual optimal value `d(λ*)`, a certified global lower bound.
    pub value: f64,
    pub x: Vec<f64>,
    pub lambda_star: f64,
    pub z_star: f64,
    pub case: PrsCase,
    /// `h(x) − d(λ*)`
    pub dual_gap_bound: f64,
    pub iterations: usize,
    pub certificate: CertificateReport,
}

/// `h(x) = xᵀAx + bᵀx + ρ‖x‖^p`
pub fn evaluate_objective(prob: &PrsProblem, x: &[f64]) -> f64 {
    let r2 = linalg::norm_sq(x);
    prob.a.quad_form(x) + linalg::dot(&prob.b, x) + prob.rho * libm::pow(r2, prob.p / 2.0)
}

/// Minimizer `z(λ) = (2λ/(pρ))^{2/(p−2)}` of `ρ z^{p/2} − λz` over `z ≥ 0`.
pub fn z_opt(lambda: f64, p: f64, rho: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    libm::pow(2.0 * lambda / (p * rho), 2.0 / (p - 2.0))
}

/// `Φ_ρ(λ)` and its derivative `−z(λ)`.
pub fn phi(lambda: f64, p: f64, rho: f64) -> Result<(f64, f64)> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(invalid("phi requires lambda >= 0"));
    }
    if !(p > 2.0 && rho > 0.0) {
        return Err(invalid("phi requires p > 2 and rho > 0"));
    }
    let z = z_opt(lambda, p, rho);
    // ρ z^{p/2} = (2λ/p) z at the minimizer
    Ok((-lambda * z * (p - 2.0) / p, -z))
}

fn phi_unchecked(lambda: f64, p: f64, rho: f64) -> f64 {
    -lambda * z_opt(lambda, p, rho) * (p - 2.0) / p
}

/// Value and first derivative of the dual at some λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualEval {
    pub value: f64,
    pub derivative: f64,
}

/// The dual `d(λ)` of one instance, with the eigendecomposition of `A`
/// precomputed.
///
/// Internally λ is written as `lower + s` with `s ≥ 0`, and the
/// denominators `λ_i + λ` as `base_i + s`, so that points close to the
/// boundary keep full relative precision.
#[derive(Debug, Clone)]
pub struct PrsDual {
    p: f64,
    rho: f64,
    eig: SymEig,
    gamma: Vec<f64>,
    base: Vec<f64>,
    lower: f64,
    open: bool,
    convex: bool,
}

impl PrsDual {
    pub fn new(prob: &PrsProblem, hard_case_tol: f64) -> Result<Self> {
        let eig = eigh(&prob.a)?;
        let lmin = eig.min_eigenvalue();
        let convex = lmin >= -1e-12 * eig.scale();
        let lower = (-lmin).max(0.0);
        let mut gamma = eig.coords(&prob.b);
        let base: Vec<f64> = if lmin <= 0.0 {
            eig.eigenvalues.iter().map(|l| (l - lmin).max(0.0)).collect()
        } else {
            eig.eigenvalues.clone()
        };
        let boundary_singular = lmin <= 0.0;
        let on_range = linalg::range_membership(&eig, &prob.b, hard_case_tol);
        let open = boundary_singular && !on_range;
        if boundary_singular && on_range {
            for g in gamma.iter_mut().take(eig.min_cluster_len()) {
                *g = 0.0;
            }
        }
        Ok(Self { p: prob.p, rho: prob.rho, eig, gamma, base, lower, open, convex })
    }

    /// Left end `max(0, −λ_min(A))` of the dual domain.
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    /// Whether the left end is excluded (`b ∉ Range(A − λ_min I)` and the
    /// shifted matrix is singular there).
    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn eig(&self) -> &SymEig {
        &self.eig
    }

    fn offset(&self, lambda: f64) -> Result<f64> {
        if !lambda.is_finite() {
            return Err(domain("lambda must be finite"));
        }
        let slack = 1e-12 * self.eig.scale();
        if lambda < self.lower - slack {
            return Err(domain(format!(
                "lambda {lambda:e} below the dual domain start {:e}",
                self.lower
            )));
        }
        let s = (lambda - self.lower).max(0.0);
        if self.open && s == 0.0 {
            return Err(domain("lambda on the excluded boundary of the open branch"));
        }
        Ok(s)
    }

    fn terms(&self, s: f64) -> (f64, f64, f64) {
        let mut quad = 0.0;
        let mut norm2 = 0.0;
        let mut cube = 0.0;
        for (g, d) in self.gamma.iter().zip(&self.base) {
            if *g == 0.0 {
                continue;
            }
            let t = d + s;
            quad += g * g / t;
            norm2 += g * g / (t * t);
            cube += g * g / (t * t * t);
        }
        (quad, norm2, cube)
    }

    fn value_at(&self, s: f64) -> f64 {
        let (quad, _, _) = self.terms(s);
        phi_unchecked(self.lower + s, self.p, self.rho) - quad / 4.0
    }

    /// `(d′, d″)` at offset `s`.
    fn slope_at(&self, s: f64) -> (f64, f64) {
        let lambda = self.lower + s;
        let (_, norm2, cube) = self.terms(s);
        let z = z_opt(lambda, self.p, self.rho);
        let dz = if lambda > 0.0 { 2.0 / (self.p - 2.0) * z / lambda } else { 0.0 };
        (-z + norm2 / 4.0, -dz - cube / 2.0)
    }

    pub fn value(&self, lambda: f64) -> Result<f64> {
        Ok(self.value_at(self.offset(lambda)?))
    }

    pub fn derivative(&self, lambda: f64) -> Result<f64> {
        Ok(self.slope_at(self.offset(lambda)?).0)
    }

    pub fn eval(&self, lambda: f64) -> Result<DualEval> {
        let s = self.offset(lambda)?;
        Ok(DualEval { value: self.value_at(s), derivative: self.slope_at(s).0 })
    }

    /// `−(A + λI)⁺b / 2` at offset `s`.
    fn stationary_point(&self, s: f64) -> Vec<f64> {
        let y: Vec<f64> = self
            .gamma
            .iter()
            .zip(&self.base)
            .map(|(g, d)| if *g == 0.0 { 0.0 } else { -g / (2.0 * (d + s)) })
            .collect();
        self.eig.from_coords(&y)
    }
}

/// `d(λ) = Φ_ρ(λ) − bᵀ(A + λI)⁺b/4` together with `d′(λ)`.
pub fn dual_value(lambda: f64, prob: &PrsProblem) -> Result<DualEval> {
    PrsDual::new(prob, SolverOptions::default().hard_case_tol)?.eval(lambda)
}

/// Globally minimizes `h` by maximizing the concave dual.
pub fn solve_prs(prob: &PrsProblem, opts: &SolverOptions) -> Result<PrsSolution> {
    let dual = PrsDual::new(prob, opts.hard_case_tol)?;
    let tol = opts.dual_tol;

    let boundary_optimal = !dual.open && {
        let (d0, _) = dual.slope_at(0.0);
        d0 <= tol * (1.0 + z_opt(dual.lower, prob.p, prob.rho))
    };

    let (s_star, iterations) = if boundary_optimal {
        (0.0, 0)
    } else {
        let mut hi = dual.lower.max(1.0);
        let mut grow = 0;
        while dual.slope_at(hi).0 >= 0.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 2000 || !hi.is_finite() {
                return Err(Error::NoConvergence { iterations: grow, best_lambda: dual.lower + hi });
            }
        }
        let out = decreasing_root(
            |s| dual.slope_at(s),
            |s, ds| ds.abs() <= tol * (1.0 + z_opt(dual.lower + s, prob.p, prob.rho)),
            Bracket { lo: 0.0, hi },
            hi,
            opts.max_iter,
        );
        if !out.converged {
            return Err(Error::NoConvergence {
                iterations: out.iterations,
                best_lambda: dual.lower + out.x,
            });
        }
        (out.x, out.iterations + grow)
    };

    let lambda_star = dual.lower + s_star;
    let z_star = z_opt(lambda_star, prob.p, prob.rho);
    let value = dual.value_at(s_star);

    let (x, case) = if dual.convex {
        (dual.stationary_point(s_star), PrsCase::Convex)
    } else if boundary_optimal {
        let res = min_sphere(&prob.a, &dual.eig, &prob.b, z_star, opts.hard_case_tol);
        (res.x, PrsCase::Hard)
    } else {
        (dual.stationary_point(s_star), PrsCase::Easy)
    };

    let primal = evaluate_objective(prob, &x);
    let certificate = prs_certificate(prob, lambda_star, value, opts.psd_tol)?;
    Ok(PrsSolution {
        value,
        x,
        lambda_star,
        z_star,
        case,
        dual_gap_bound: primal - value,
        iterations,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prob(a: SymMatrix, b: Vec<f64>, p: f64, rho: f64) -> PrsProblem {
        PrsProblem::new(a, b, p, rho).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(0.0, 3.0, 2.0).unwrap(), (0.0, 0.0));
        let (v, d) = phi(2.0, 4.0, 1.0).unwrap();
        assert!((v + 1.0).abs() < 1e-15 && (d + 1.0).abs() < 1e-15);
        assert!(phi(-1.0, 4.0, 1.0).is_err());
    }

    #[test]
    fn phi_matches_closed_form() {
        // ρ^{−2/(p−2)} λ^{p/(p−2)} ((2/p)^{p/(p−2)} − (2/p)^{2/(p−2)})
        for &(l, p, rho) in &[(1.3, 3.0, 0.5), (0.2, 2.5, 4.0), (7.0, 6.0, 1.0)] {
            let e = 1.0 / (p - 2.0);
            let closed = libm::pow(rho, -2.0 * e)
                * libm::pow(l, p * e)
                * (libm::pow(2.0 / p, p * e) - libm::pow(2.0 / p, 2.0 * e));
            let (v, _) = phi(l, p, rho).unwrap();
            assert!((v - closed).abs() <= 1e-12 * (1.0 + closed.abs()));
        }
    }

    #[test]
    fn phi_matches_grid_minimization() {
        let (l, p, rho) = (1.3, 3.0, 0.5);
        let n = 10_000_000;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            let z = 100.0 * i as f64 / n as f64;
            best = best.min(rho * libm::pow(z, p / 2.0) - l * z);
        }
        let (v, _) = phi(l, p, rho).unwrap();
        assert!((v - best).abs() <= 1e-6, "{v} vs {best}");
    }

    #[test]
    fn dual_value_examples() {
        let p1 = prob(SymMatrix::from_diag(&[-1.0, -1.0]), vec![0.0, 0.0], 4.0, 1.0);
        assert!((dual_value(1.0, &p1).unwrap().value + 0.25).abs() < 1e-15);
        let p2 = prob(SymMatrix::from_diag(&[-1.0, 3.0]), vec![0.0, 2.0], 4.0, 1.0);
        assert!((dual_value(2.0, &p2).unwrap().value + 1.2).abs() < 1e-14);
        assert!(matches!(dual_value(0.5, &p2), Err(Error::DomainError(_))));
        let open = prob(SymMatrix::from_diag(&[-1.0, 3.0]), vec![1.0, 2.0], 4.0, 1.0);
        assert!(matches!(dual_value(1.0, &open), Err(Error::DomainError(_))));
        assert!(dual_value(1.0 + 1e-6, &open).is_ok());
    }

    #[test]
    fn closed_form_hard_instance() {
        for n in 2..=5 {
            let pr = prob(SymMatrix::from_diag(&vec![-1.0; n]), vec![0.0; n], 4.0, 1.0);
            let sol = solve_prs(&pr, &SolverOptions::default()).unwrap();
            assert_eq!(sol.case, PrsCase::Hard);
            assert!((sol.value + 0.25).abs() < 1e-12);
            assert!((sol.lambda_star - 1.0).abs() < 1e-12);
            assert!((sol.z_star - 0.5).abs() < 1e-12);
            assert!((linalg::norm_sq(&sol.x) - 0.5).abs() < 1e-12);
            assert!(sol.certificate.verdict);
        }
    }

    #[test]
    fn axis_restricted_convex_instance() {
        // A = I, b = (-4, 0), p = 4: minimizer lies on the positive first axis.
        let pr = prob(SymMatrix::identity(2), vec![-4.0, 0.0], 4.0, 1.0);
        let sol = solve_prs(&pr, &SolverOptions::default()).unwrap();
        assert_eq!(sol.case, PrsCase::Convex);
        let n = 2_000_000;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=n {
            let s = 3.0 * i as f64 / n as f64;
            let v = s * s - 4.0 * s + s * s * s * s;
            if v < best.0 {
                best = (v, s);
            }
        }
        assert!((sol.value - best.0).abs() < 1e-8);
        assert!((sol.x[0] - best.1).abs() < 1e-5);
        assert!(sol.x[1].abs() < 1e-14);
    }

    #[test]
    fn convex_zero_b_is_origin() {
        let pr = prob(SymMatrix::from_diag(&[1.0, 2.0]), vec![0.0, 0.0], 3.0, 1.0);
        let sol = solve_prs(&pr, &SolverOptions::default()).unwrap();
        assert_eq!(sol.case, PrsCase::Convex);
        assert_eq!(sol.value, 0.0);
        assert_eq!(sol.x, vec![0.0, 0.0]);
        assert_eq!(sol.lambda_star, 0.0);
    }

    #[test]
    fn easy_instance_is_stationary() {
        let pr = prob(SymMatrix::from_diag(&[-2.0, 1.0]), vec![1.0, 1.0], 3.0, 1.0);
        let sol = solve_prs(&pr, &SolverOptions::default()).unwrap();
        assert_eq!(sol.case, PrsCase::Easy);
        let resid = linalg::norm(&{
            let mut g = pr.a.shifted(sol.lambda_star).mul_vec(&sol.x);
            for (gi, bi) in g.iter_mut().zip(&pr.b) {
                *gi = 2.0 * *gi + bi;
            }
            g
        });
        assert!(resid <= 1e-7 * (1.0 + linalg::norm(&pr.b)));
        assert!((linalg::norm_sq(&sol.x) - sol.z_star).abs() <= 1e-7 * (1.0 + sol.z_star));
        assert!(sol.dual_gap_bound.abs() <= 1e-7 * (1.0 + sol.value.abs()));
    }

    #[test]
    fn z_star_matches_multiplier() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let data: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = SymMatrix::from_matrix(&linalg::Matrix::new(3, 3, data).unwrap()).unwrap();
            let b: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let rho = rng.random_range(0.2..3.0);
            let pr = prob(a, b, 3.5, rho);
            let sol = solve_prs(&pr, &SolverOptions::default()).unwrap();
            if sol.lambda_star > 0.0 {
                let z = libm::pow(2.0 * sol.lambda_star / (3.5 * rho), 2.0 / 1.5);
                assert!((sol.z_star - z).abs() <= 1e-9 * z);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let a = SymMatrix::identity(2);
        assert!(PrsProblem::new(a.clone(), vec![0.0, 0.0], 2.0, 1.0).is_err());
        assert!(PrsProblem::new(a.clone(), vec![0.0, 0.0], 3.0, 0.0).is_err());
        assert!(PrsProblem::new(a, vec![0.0], 3.0, 1.0).is_err());
    }
}
