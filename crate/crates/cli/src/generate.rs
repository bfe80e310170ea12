use hcx_core::linalg::{self, Matrix};
use hcx_core::prs::z_opt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{CliError, Result};
use crate::problem::{Kind, ProblemFile};

/// Exponents cycled through when `p` is not given.
pub const P_CHOICES: [f64; 4] = [2.5, 3.0, 4.0, 6.0];

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub kind: Kind,
    pub n: usize,
    /// Rows of `A` for backward-error instances; defaults to `n + 1`.
    pub m: Option<usize>,
    pub seed: u64,
    pub hard: bool,
    pub p: Option<f64>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| normal(rng)).collect();
    Matrix::new(rows, cols, data).expect("sized buffer")
}

/// Orthogonal matrix from Gram-Schmidt on Gaussian columns.
fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        // two passes keep the basis orthogonal to working precision
        for _ in 0..2 {
            for q in &cols {
                let d = linalg::dot(q, &v);
                linalg::axpy(-d, q, &mut v);
            }
        }
        let nv = linalg::norm(&v);
        if nv > 1e-6 {
            cols.push(linalg::scaled(1.0 / nv, &v));
        }
    }
    Matrix::from_columns(&cols).expect("square basis")
}

pub fn generate(params: &GenParams) -> Result<ProblemFile> {
    if params.n == 0 {
        return Err(CliError::Invalid("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    match params.kind {
        Kind::Prs => {
            let p = params.p.unwrap_or(P_CHOICES[(params.seed % 4) as usize]);
            if p.is_nan() || p <= 2.0 {
                return Err(CliError::Invalid("p must exceed 2".into()));
            }
            let (a, b) = if params.hard { hard_prs(&mut rng, params.n, p) } else { random_prs(&mut rng, params.n) };
            Ok(ProblemFile { kind: Kind::Prs, a: Some(a.to_rows()), a_mm: None, b, p: Some(p), rho: Some(1.0) })
        }
        Kind::Be => {
            if params.hard {
                return Err(CliError::Invalid("--hard only applies to prs instances".into()));
            }
            if params.p.is_some() {
                return Err(CliError::Invalid("--p only applies to prs instances".into()));
            }
            let m = params.m.unwrap_or(params.n + 1);
            if m == 0 {
                return Err(CliError::Invalid("m must be positive".into()));
            }
            let a = gaussian(&mut rng, m, params.n);
            let b = (0..m).map(|_| normal(&mut rng)).collect();
            Ok(ProblemFile { kind: Kind::Be, a: Some(a.to_rows()), a_mm: None, b, p: None, rho: None })
        }
    }
}

fn random_prs(rng: &mut ChaCha8Rng, n: usize) -> (Matrix, Vec<f64>) {
    let g = gaussian(rng, n, n);
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, 0.5 * (g.get(i, j) + g.get(j, i)));
        }
    }
    let b = (0..n).map(|_| normal(rng)).collect();
    (a, b)
}

/// `A = U diag(λ) Uᵀ` with `λ_min < 0` simple and `b ⊥ q_min`, scaled so
/// that `‖(A − λ_min I)⁺b‖²/4 = z(−λ_min)/2`. The dual slope at the left
/// end of its domain is then `−z/2 < 0`, which puts the maximizer on the
/// boundary.
fn hard_prs(rng: &mut ChaCha8Rng, n: usize, p: f64) -> (Matrix, Vec<f64>) {
    let lmin = -(0.5 + 1.5 * rng.random::<f64>());
    let eigenvalues: Vec<f64> = (0..n)
        .map(|i| if i == 0 { lmin } else { lmin + 0.5 + 3.0 * rng.random::<f64>() })
        .collect();
    let u = orthogonal(rng, n);
    let mut y: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { normal(rng) }).collect();
    let x0_sq: f64 = (1..n).map(|i| (y[i] / (2.0 * (eigenvalues[i] - lmin))).powi(2)).sum();
    if x0_sq > 0.0 {
        let target = 0.5 * z_opt(-lmin, p, 1.0);
        let c = (target / x0_sq).sqrt();
        y.iter_mut().for_each(|v| *v *= c);
    }
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = (0..n).map(|k| u.get(i, k) * eigenvalues[k] * u.get(j, k)).sum();
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    (a, u.mul_vec(&y))
}
