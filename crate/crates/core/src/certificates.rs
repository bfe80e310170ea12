//! Positive-semidefinite block-matrix certificates and a sampling probe for
//! the convexity of the joint range of two quadratics.
//!
//! A quadratic `xᵀGx + 2gᵀx + c` is nonnegative on all of `ℝⁿ` exactly when
//! `[[G, g], [gᵀ, c]] ⪰ 0`. Both certificates below are instances of that
//! equivalence, so a `true` verdict is a global statement about the
//! objective, not a local one.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::backward_error::BeProblem;
use crate::error::{invalid, Result};
use crate::linalg::{self, eigh, SymMatrix};
use crate::prs::{phi, PrsProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CertificateKind {
    Prs,
    Be,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub kind: CertificateKind,
    pub block_matrix: SymMatrix,
    pub min_eigenvalue: f64,
    pub verdict: bool,
    pub lambda: f64,
    /// `t` for [`CertificateKind::Prs`], `w` for [`CertificateKind::Be`].
    pub parameter: f64,
    /// Absolute threshold the minimum eigenvalue was compared against.
    pub tolerance: f64,
}

fn report(kind: CertificateKind, m: SymMatrix, lambda: f64, parameter: f64, tol: f64) -> Result<CertificateReport> {
    let eig = eigh(&m)?;
    let tolerance = tol * (1.0 + m.max_abs());
    let min_eigenvalue = eig.min_eigenvalue();
    Ok(CertificateReport {
        kind,
        block_matrix: m,
        min_eigenvalue,
        verdict: min_eigenvalue >= -tolerance,
        lambda,
        parameter,
        tolerance,
    })
}

/// Checks `[[A + λI, b/2], [bᵀ/2, −t + Φ_ρ(λ)]] ⪰ 0`, which certifies
/// `h(x) ≥ t` for every `x`.
pub fn prs_certificate(prob: &PrsProblem, lambda: f64, t: f64, tol: f64) -> Result<CertificateReport> {
    if lambda.is_nan() || lambda < 0.0 || !t.is_finite() {
        return Err(invalid("certificate needs lambda >= 0 and a finite t"));
    }
    let (phi_val, _) = phi(lambda, prob.p, prob.rho)?;
    let half_b = linalg::scaled(0.5, &prob.b);
    let m = prob.a.shifted(lambda).bordered(&half_b, -t + phi_val)?;
    report(CertificateKind::Prs, m, lambda, t, tol)
}

/// Checks `[[AᵀA − λI, −Aᵀb], [−bᵀA, w]] ⪰ 0`.
pub fn be_certificate(prob: &BeProblem, lambda: f64, w: f64, tol: f64) -> Result<CertificateReport> {
    if !lambda.is_finite() || !w.is_finite() {
        return Err(invalid("certificate needs finite lambda and w"));
    }
    let g = prob.a.gram().shifted(-lambda);
    let atb = linalg::scaled(-1.0, &prob.a.tr_mul_vec(&prob.b));
    let m = g.bordered(&atb, w)?;
    report(CertificateKind::Be, m, lambda, w, tol)
}

/// `f(x) = xᵀAx + aᵀx + p`, `g(x) = xᵀBx + bᵀx + q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPair {
    pub a_mat: SymMatrix,
    pub b_mat: SymMatrix,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub p: f64,
    pub q: f64,
}

impl QuadraticPair {
    pub fn new(a_mat: SymMatrix, b_mat: SymMatrix, a: Vec<f64>, b: Vec<f64>, p: f64, q: f64) -> Result<Self> {
        let n = a_mat.dim();
        if b_mat.dim() != n || a.len() != n || b.len() != n {
            return Err(invalid("quadratic pair dimensions do not match"));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) || !p.is_finite() || !q.is_finite() {
            return Err(invalid("quadratic pair has non-finite data"));
        }
        Ok(Self { a_mat, b_mat, a, b, p, q })
    }

    /// Pair of quadratic forms (no linear or constant terms).
    pub fn homogeneous(a_mat: SymMatrix, b_mat: SymMatrix) -> Result<Self> {
        let n = a_mat.dim();
        Self::new(a_mat, b_mat, vec![0.0; n], vec![0.0; n], 0.0, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn eval(&self, x: &[f64]) -> (f64, f64) {
        (
            self.a_mat.quad_form(x) + linalg::dot(&self.a, x) + self.p,
            self.b_mat.quad_form(x) + linalg::dot(&self.b, x) + self.q,
        )
    }

    fn gradients(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut gf = self.a_mat.mul_vec(x);
        let mut gg = self.b_mat.mul_vec(x);
        for i in 0..x.len() {
            gf[i] = 2.0 * gf[i] + self.a[i];
            gg[i] = 2.0 * gg[i] + self.b[i];
        }
        (gf, gg)
    }

    fn data_norm(&self) -> f64 {
        let mats = linalg::norm_sq(self.a_mat.as_matrix().as_slice()) + linalg::norm_sq(self.b_mat.as_matrix().as_slice());
        libm::sqrt(mats + linalg::norm_sq(&self.a) + linalg::norm_sq(&self.b) + self.p * self.p + self.q * self.q)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeReport {
    pub samples: usize,
    pub trials: usize,
    pub realized: usize,
    pub fraction: f64,
    /// Largest relative residual `‖(f, g)(x) − m‖ / (1 + |m₁| + |m₂|)`
    /// among the best attempts of all trials.
    pub worst_residual: f64,
    pub tolerance: f64,
    pub seed: u64,
}

const PROBE_TOL: f64 = 1e-6;
const PROBE_RESTARTS: usize = 20;
const PROBE_LM_STEPS: usize = 200;

/// Empirical test of the convexity of `{(f(x), g(x)) : x ∈ ℝⁿ}`.
///
/// Maps a Gaussian point cloud through the pair, then tries to realize the
/// midpoint of random pairs of image points by Levenberg-Marquardt on
/// `(f(x) − u, g(x) − v)`. A fraction below one is a witness of
/// nonconvexity (up to local-search failures); a fraction of one is
/// evidence, not proof, of convexity.
pub fn joint_range_probe(pair: &QuadraticPair, samples: usize, trials: usize, seed: u64) -> Result<ProbeReport> {
    if samples < 1000 || trials < 10 {
        return Err(invalid("probe needs samples >= 1000 and trials >= 10"));
    }
    let n = pair.dim();
    let sigma = 3.0 * (1.0 + pair.data_norm());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
    };

    let cloud: Vec<Vec<f64>> = (0..samples).map(|_| gaussian(&mut rng)).collect();
    let image: Vec<(f64, f64)> = cloud.iter().map(|x| pair.eval(x)).collect();

    let mut realized = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let i = rng.random_range(0..samples);
        let mut j = rng.random_range(0..samples - 1);
        if j >= i {
            j += 1;
        }
        let target = (0.5 * (image[i].0 + image[j].0), 0.5 * (image[i].1 + image[j].1));
        let scale = 1.0 + target.0.abs() + target.1.abs();

        let mut starts = vec![cloud[i].clone(), cloud[j].clone()];
        starts.push(cloud[i].iter().zip(&cloud[j]).map(|(u, v)| 0.5 * (u + v)).collect());
        while starts.len() < PROBE_RESTARTS {
            starts.push(gaussian(&mut rng));
        }

        let mut best = f64::INFINITY;
        for start in starts {
            let r = realize(pair, start, target, PROBE_TOL * scale);
            best = best.min(r);
            if best <= PROBE_TOL * scale {
                break;
            }
        }
        if best <= PROBE_TOL * scale {
            realized += 1;
        }
        worst = worst.max(best / scale);
    }
    Ok(ProbeReport {
        samples,
        trials,
        realized,
        fraction: realized as f64 / trials as f64,
        worst_residual: worst,
        tolerance: PROBE_TOL,
        seed,
    })
}

/// Levenberg-Marquardt with the minimum-norm step
/// `δ = −Jᵀ(JJᵀ + μI)⁻¹r`. Returns the smallest residual norm reached.
fn realize(pair: &QuadraticPair, mut x: Vec<f64>, target: (f64, f64), tol: f64) -> f64 {
    let resid = |x: &[f64]| {
        let (f, g) = pair.eval(x);
        (f - target.0, g - target.1)
    };
    let mut r = resid(&x);
    let mut rn = libm::hypot(r.0, r.1);
    let mut mu = 1e-3;
    for _ in 0..PROBE_LM_STEPS {
        if rn <= tol {
            break;
        }
        let (gf, gg) = pair.gradients(&x);
        let k11 = linalg::dot(&gf, &gf) + mu;
        let k12 = linalg::dot(&gf, &gg);
        let k22 = linalg::dot(&gg, &gg) + mu;
        let det = k11 * k22 - k12 * k12;
        if !(det.is_finite() && det > 0.0) {
            break;
        }
        let y1 = (k22 * r.0 - k12 * r.1) / det;
        let y2 = (k11 * r.1 - k12 * r.0) / det;
        let trial: Vec<f64> = x.iter().enumerate().map(|(k, xi)| xi - gf[k] * y1 - gg[k] * y2).collect();
        let rt = resid(&trial);
        let rtn = libm::hypot(rt.0, rt.1);
        if rtn < rn {
            x = trial;
            r = rt;
            rn = rtn;
            mu = (mu / 3.0).max(1e-15);
        } else {
            mu *= 4.0;
            if mu > 1e20 {
                break;
            }
        }
    }
    rn
}
