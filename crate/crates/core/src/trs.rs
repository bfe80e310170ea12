//! Ball- and sphere-constrained quadratic minimization/maximization.
//!
//! The objective is `xᵀQx + cᵀx`. Sphere problems are solved in the
//! eigenbasis of `Q` through the secular equation `‖x(μ)‖² = r²` with
//! `x(μ) = −(Q + μI)⁺c/2`, including the hard case where `c` has no
//! component along the smallest eigenvector.
//!
//! The reported `multiplier` always satisfies `2(Q + μI)x + c = 0`. For
//! minimization `Q + μI ⪰ 0`; for maximization `Q + μI ⪯ 0`.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::linalg::{self, eigh, norm, psd_check, PsdVerdict, SymEig, SymMatrix};
use crate::roots::{decreasing_root, Bracket};

/// Projection threshold (relative to `1 + ‖c‖`) below which `c` is taken to
/// be orthogonal to the smallest-eigenvalue eigenspace.
pub const HARD_CASE_TOL: f64 = 1e-8;
const SECULAR_TOL: f64 = 1e-10;
const SECULAR_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Constraint {
    Ball,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TrsCase {
    Interior,
    EasyBoundary,
    HardBoundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrsRequest {
    pub q: SymMatrix,
    pub c: Vec<f64>,
    pub radius_sq: f64,
    pub constraint: Constraint,
    pub sense: Sense,
}

impl TrsRequest {
    pub fn new(
        q: SymMatrix,
        c: Vec<f64>,
        radius_sq: f64,
        constraint: Constraint,
        sense: Sense,
    ) -> Result<Self> {
        let req = Self { q, c, radius_sq, constraint, sense };
        req.validate()?;
        Ok(req)
    }

    fn validate(&self) -> Result<()> {
        if self.c.len() != self.q.dim() {
            return Err(invalid("linear term has the wrong dimension"));
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(invalid("linear term has non-finite entries"));
        }
        if !(self.radius_sq.is_finite() && self.radius_sq > 0.0) {
            return Err(invalid("radius_sq must be positive and finite"));
        }
        if self.constraint == Constraint::Ball && self.sense == Sense::Max {
            return Err(invalid("ball constraint only supports minimization"));
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.q.quad_form(x) + linalg::dot(&self.c, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrsResult {
    pub x: Vec<f64>,
    pub multiplier: f64,
    pub objective: f64,
    pub case: TrsCase,
    pub kkt_residual: f64,
}

/// First- and second-order optimality summary of a [`TrsResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// `‖2(Q + μI)x + c‖ / (1 + ‖c‖)`
    pub residual: f64,
    /// `Q + μI ⪰ 0` for minimization, `−(Q + μI) ⪰ 0` for maximization.
    pub second_order: PsdVerdict,
    /// `|‖x‖² − r²|` for spheres, `max(0, ‖x‖² − r²)` for balls.
    pub feasibility_error: f64,
    /// Sign condition on the multiplier (`μ ≥ 0` for balls).
    pub multiplier_sign_ok: bool,
}

pub(crate) fn stationarity_residual(q: &SymMatrix, c: &[f64], mu: f64, x: &[f64]) -> f64 {
    let mut g = q.shifted(mu).mul_vec(x);
    for (gi, ci) in g.iter_mut().zip(c) {
        *gi = 2.0 * *gi + ci;
    }
    norm(&g) / (1.0 + norm(c))
}

pub fn solve_trs(req: &TrsRequest) -> Result<TrsResult> {
    req.validate()?;
    match (req.constraint, req.sense) {
        (Constraint::Sphere, Sense::Min) => {
            let eig = eigh(&req.q)?;
            Ok(min_sphere(&req.q, &eig, &req.c, req.radius_sq, HARD_CASE_TOL))
        }
        (Constraint::Sphere, Sense::Max) => {
            let neg_q = req.q.scale(-1.0);
            let neg_c = linalg::scaled(-1.0, &req.c);
            let eig = eigh(&neg_q)?;
            let inner = min_sphere(&neg_q, &eig, &neg_c, req.radius_sq, HARD_CASE_TOL);
            Ok(TrsResult {
                x: inner.x,
                multiplier: -inner.multiplier,
                objective: -inner.objective,
                case: inner.case,
                kkt_residual: inner.kkt_residual,
            })
        }
        (Constraint::Ball, _) => {
            let eig = eigh(&req.q)?;
            if let Some(res) = interior_ball(req, &eig) {
                return Ok(res);
            }
            Ok(min_sphere(&req.q, &eig, &req.c, req.radius_sq, HARD_CASE_TOL))
        }
    }
}

fn interior_ball(req: &TrsRequest, eig: &SymEig) -> Option<TrsResult> {
    if eig.min_eigenvalue() < -1e-12 * eig.scale() {
        return None;
    }
    let x = linalg::scaled(-0.5, &eig.apply_shifted_pinv(0.0, &req.c, 1e-12));
    let residual = stationarity_residual(&req.q, &req.c, 0.0, &x);
    if residual > 1e-9 || linalg::norm_sq(&x) > req.radius_sq {
        return None;
    }
    Some(TrsResult {
        objective: req.objective(&x),
        x,
        multiplier: 0.0,
        case: TrsCase::Interior,
        kkt_residual: residual,
    })
}

/// Minimizes `xᵀQx + cᵀx` on `‖x‖² = r²` given `eig = eigh(Q)`.
pub(crate) fn min_sphere(
    q: &SymMatrix,
    eig: &SymEig,
    c: &[f64],
    r2: f64,
    hard_tol: f64,
) -> TrsResult {
    let gamma = eig.coords(c);
    let lmin = eig.min_eigenvalue();
    let cluster = eig.min_cluster_len();
    let gaps: Vec<f64> = eig.eigenvalues.iter().map(|l| (l - lmin).max(0.0)).collect();
    let c_norm = norm(c);

    let proj: f64 = libm::sqrt(gamma[..cluster].iter().map(|g| g * g).sum());
    if proj <= hard_tol * (1.0 + c_norm) {
        let mut y: Vec<f64> = gamma
            .iter()
            .zip(&gaps)
            .enumerate()
            .map(|(i, (g, d))| if i < cluster { 0.0 } else { -g / (2.0 * d) })
            .collect();
        let base = linalg::norm_sq(&y);
        if base <= r2 {
            y[0] = libm::sqrt(r2 - base);
            return finish(q, eig, c, &y, -lmin, TrsCase::HardBoundary, r2);
        }
    }

    let x_norm_sq = |s: f64| -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for (g, d) in gamma.iter().zip(&gaps) {
            let t = d + s;
            v += g * g / (4.0 * t * t);
            dv -= g * g / (2.0 * t * t * t);
        }
        (v, dv)
    };
    let r = libm::sqrt(r2);
    let hi = c_norm / (2.0 * r) + 1.0;
    let out = decreasing_root(
        |s| {
            let (v, dv) = x_norm_sq(s);
            let nx = libm::sqrt(v);
            // φ(s) = 1/r − 1/‖x(s)‖ is decreasing and close to linear in s
            (1.0 / r - 1.0 / nx, dv / (2.0 * nx * v))
        },
        |s, _| (x_norm_sq(s).0 - r2).abs() <= SECULAR_TOL * (1.0 + r2),
        Bracket { lo: 0.0, hi },
        hi,
        SECULAR_MAX_ITER,
    );
    let s = out.x;
    let y: Vec<f64> = gamma.iter().zip(&gaps).map(|(g, d)| -g / (2.0 * (d + s))).collect();
    finish(q, eig, c, &y, s - lmin, TrsCase::EasyBoundary, r2)
}

fn finish(
    q: &SymMatrix,
    eig: &SymEig,
    c: &[f64],
    y: &[f64],
    multiplier: f64,
    case: TrsCase,
    r2: f64,
) -> TrsResult {
    let mut x = eig.from_coords(y);
    let nx = norm(&x);
    if nx > 0.0 {
        let f = libm::sqrt(r2) / nx;
        for v in x.iter_mut() {
            *v *= f;
        }
    }
    let objective = q.quad_form(&x) + linalg::dot(c, &x);
    let kkt_residual = stationarity_residual(q, c, multiplier, &x);
    TrsResult { x, multiplier, objective, case, kkt_residual }
}

/// Recomputes the optimality conditions of `res` for `req`.
pub fn kkt_report(req: &TrsRequest, res: &TrsResult) -> KktReport {
    let residual = stationarity_residual(&req.q, &req.c, res.multiplier, &res.x);
    let shifted = req.q.shifted(res.multiplier);
    let second_order = match req.sense {
        Sense::Min => psd_check(&shifted, 1e-8),
        Sense::Max => psd_check(&shifted.scale(-1.0), 1e-8),
    };
    let nx2 = linalg::norm_sq(&res.x);
    let (feasibility_error, multiplier_sign_ok) = match req.constraint {
        Constraint::Sphere => ((nx2 - req.radius_sq).abs(), true),
        Constraint::Ball => ((nx2 - req.radius_sq).max(0.0), res.multiplier >= 0.0),
    };
    KktReport { residual, second_order, feasibility_error, multiplier_sign_ok }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sphere(q: SymMatrix, c: Vec<f64>, r2: f64, sense: Sense) -> TrsRequest {
        TrsRequest::new(q, c, r2, Constraint::Sphere, sense).unwrap()
    }

    #[test]
    fn ball_interior_at_origin() {
        let req = TrsRequest::new(SymMatrix::identity(2), vec![0.0, 0.0], 1.0, Constraint::Ball, Sense::Min)
            .unwrap();
        let res = solve_trs(&req).unwrap();
        assert_eq!(res.case, TrsCase::Interior);
        assert_eq!(res.x, vec![0.0, 0.0]);
        assert_eq!(res.objective, 0.0);
        assert_eq!(res.multiplier, 0.0);
    }

    #[test]
    fn ball_interior_unconstrained_minimizer() {
        let req = TrsRequest::new(SymMatrix::identity(2), vec![-1.0, 0.0], 1.0, Constraint::Ball, Sense::Min)
            .unwrap();
        let res = solve_trs(&req).unwrap();
        assert_eq!(res.case, TrsCase::Interior);
        assert!((res.x[0] - 0.5).abs() < 1e-15);
        assert!((res.objective + 0.25).abs() < 1e-15);
    }

    #[test]
    fn ball_falls_back_to_boundary() {
        let req = TrsRequest::new(SymMatrix::identity(2), vec![-8.0, 0.0], 1.0, Constraint::Ball, Sense::Min)
            .unwrap();
        let res = solve_trs(&req).unwrap();
        assert_eq!(res.case, TrsCase::EasyBoundary);
        assert!((res.x[0] - 1.0).abs() < 1e-9);
        assert!((res.multiplier - 3.0).abs() < 1e-8);
        let k = kkt_report(&req, &res);
        assert!(k.multiplier_sign_ok && k.second_order.is_psd);
    }

    #[test]
    fn hard_case_symmetric() {
        let req = sphere(SymMatrix::from_diag(&[-1.0, 1.0]), vec![0.0, 0.0], 1.0, Sense::Min);
        let res = solve_trs(&req).unwrap();
        assert_eq!(res.case, TrsCase::HardBoundary);
        assert_eq!(res.x, vec![1.0, 0.0]);
        assert_eq!(res.objective, -1.0);
        assert_eq!(res.multiplier, 1.0);
        let k = kkt_report(&req, &res);
        assert!(k.second_order.is_psd);
        assert!(k.residual == 0.0);
    }

    #[test]
    fn hard_case_with_offset() {
        // c orthogonal to e1, small enough that the pseudoinverse point is inside.
        let req = sphere(SymMatrix::from_diag(&[-2.0, 1.0]), vec![0.0, 1.0], 1.0, Sense::Min);
        let res = solve_trs(&req).unwrap();
        assert_eq!(res.case, TrsCase::HardBoundary);
        // x2 = -c2 / (2 (1 + 2)) = -1/6, x1 = sqrt(1 - 1/36)
        assert!((res.x[1] + 1.0 / 6.0).abs() < 1e-14);
        assert!((res.x[0] - libm::sqrt(35.0 / 36.0)).abs() < 1e-14);
        assert!(res.kkt_residual < 1e-14);
    }

    #[test]
    fn circle_grid_oracle() {
        let q = SymMatrix::from_diag(&[1.0, 2.0]);
        let c = vec![-2.0, 0.0];
        let req = sphere(q.clone(), c.clone(), 1.0, Sense::Min);
        let res = solve_trs(&req).unwrap();
        let k = 200_000;
        let best = (0..k)
            .map(|i| {
                let th = 2.0 * core::f64::consts::PI * i as f64 / k as f64;
                let x = [libm::cos(th), libm::sin(th)];
                q.quad_form(&x) + linalg::dot(&c, &x)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((res.objective - best).abs() <= 1e-6);
        assert!((res.objective - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn max_sphere_is_negated_min() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let data: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = SymMatrix::from_matrix(&linalg::Matrix::new(3, 3, data).unwrap()).unwrap();
        let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let max = solve_trs(&sphere(q.clone(), c.clone(), 2.0, Sense::Max)).unwrap();
        let min_neg = solve_trs(&sphere(q.scale(-1.0), linalg::scaled(-1.0, &c), 2.0, Sense::Min)).unwrap();
        assert_eq!(max.objective, -min_neg.objective);
        let req = sphere(q, c, 2.0, Sense::Max);
        let k = kkt_report(&req, &max);
        assert!(k.residual < 1e-9 && k.second_order.is_psd);
    }

    #[test]
    fn perturbed_point_has_large_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let data: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let q = SymMatrix::from_matrix(&linalg::Matrix::new(4, 4, data).unwrap()).unwrap();
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let req = sphere(q, c, 1.5, Sense::Min);
            let mut res = solve_trs(&req).unwrap();
            assert!(kkt_report(&req, &res).residual <= 1e-7);
            res.x[0] += 0.1;
            assert!(kkt_report(&req, &res).residual > 1e-3);
        }
    }

    #[test]
    fn rejects_invalid_requests() {
        let q = SymMatrix::identity(2);
        assert!(TrsRequest::new(q.clone(), vec![0.0, 0.0], 0.0, Constraint::Sphere, Sense::Min).is_err());
        assert!(TrsRequest::new(q.clone(), vec![0.0, 0.0], 1.0, Constraint::Ball, Sense::Max).is_err());
        assert!(TrsRequest::new(q.clone(), vec![0.0], 1.0, Constraint::Sphere, Sense::Min).is_err());
        assert!(TrsRequest::new(q, vec![f64::NAN, 0.0], 1.0, Constraint::Sphere, Sense::Min).is_err());
    }

    #[test]
    fn near_hard_case_converges() {
        let req = sphere(SymMatrix::from_diag(&[-1.0, 1.0, 3.0]), vec![1e-7, 0.3, -0.2], 4.0, Sense::Min);
        let res = solve_trs(&req).unwrap();
        assert_eq!(res.case, TrsCase::EasyBoundary);
        let k = kkt_report(&req, &res);
        assert!(k.residual <= 1e-7, "{}", k.residual);
        assert!(k.feasibility_error <= 1e-8 * 5.0);
        assert!(res.multiplier >= 1.0 - 1e-9);
    }
}
