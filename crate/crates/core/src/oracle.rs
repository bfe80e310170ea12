//! Brute-force reference solvers.
//!
//! Multi-start gradient descent with no knowledge of the dual machinery.
//! These give statistical evidence only; they are the yardstick the dual
//! solvers are tested against on small instances.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::backward_error::BeProblem;
use crate::linalg::{self, spectral_norm};
use crate::prs::{evaluate_objective, PrsProblem};

const MAX_STEPS: usize = 10_000;
const GRAD_TOL: f64 = 1e-10;
const SCAN_POINTS: usize = 2000;
const SCAN_DIRECTIONS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleReport {
    /// Best objective found (`h` for p-RS, the un-squared ratio for BE).
    pub value: f64,
    pub x: Vec<f64>,
    pub starts: usize,
    pub best_start_index: usize,
    /// Gap to the best value of a different basin, if one was found.
    pub spread: Option<f64>,
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let nv = linalg::norm(&v);
        if nv > 1e-12 {
            return linalg::scaled(1.0 / nv, &v);
        }
    }
}

/// Gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking.
fn descend<F, G>(f: F, grad: G, mut x: Vec<f64>, gtol: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let mut fx = f(&x);
    let mut g = grad(&x);
    let mut step = 1.0 / linalg::norm(&g).max(1.0);
    let mut stalled = 0;
    for _ in 0..MAX_STEPS {
        let gn2 = linalg::norm_sq(&g);
        if libm::sqrt(gn2) <= gtol || !fx.is_finite() {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx - 1e-4 * t * gn2 {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gnew = grad(&xn);
        let s = linalg::sub(&xn, &x);
        let y = linalg::sub(&gnew, &g);
        let sy = linalg::dot(&s, &y);
        step = if sy > 0.0 { linalg::norm_sq(&s) / sy } else { 2.0 * t };
        if (fx - fnew).abs() <= 1e-16 * fx.abs().max(1e-300) {
            stalled += 1;
            if stalled >= 20 {
                x = xn;
                fx = fnew;
                break;
            }
        } else {
            stalled = 0;
        }
        x = xn;
        fx = fnew;
        g = gnew;
    }
    (x, fx)
}

fn pick_best(results: Vec<(Vec<f64>, f64)>) -> (usize, Vec<f64>, f64, Option<f64>) {
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.1 < results[best].1 {
            best = i;
        }
    }
    let fb = results[best].1;
    let sep = 1e-8 * (1.0 + fb.abs());
    let second = results
        .iter()
        .map(|r| r.1)
        .filter(|v| *v > fb + sep)
        .fold(f64::INFINITY, f64::min);
    let spread = second.is_finite().then_some(second - fb);
    let (x, v) = results.into_iter().nth(best).expect("at least one start");
    (best, x, v, spread)
}

/// Radius beyond which `h` is increasing along every ray.
fn prs_radius(prob: &PrsProblem, norm_a: f64) -> f64 {
    let (p, rho) = (prob.p, prob.rho);
    let b_norm = linalg::norm(&prob.b);
    let mut r = 3.0 * libm::pow(2.0 * norm_a / (rho * p), 1.0 / (p - 2.0)) + b_norm;
    r = r.max(1.0);
    // radial slope ≥ ρ p r^{p−1} − 2‖A‖r − ‖b‖
    while rho * p * libm::pow(r, p - 1.0) < 2.0 * norm_a * r + b_norm {
        r *= 2.0;
    }
    r
}

pub fn oracle_prs(prob: &PrsProblem, starts: usize, seed: u64) -> OracleReport {
    let n = prob.dim();
    let norm_a = spectral_norm(prob.a.as_matrix());
    let radius = prs_radius(prob, norm_a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut initial: Vec<Vec<f64>> = Vec::new();
    for _ in 0..starts {
        let u = random_unit(&mut rng, n);
        let r = radius * libm::pow(rng.random::<f64>(), 1.0 / n as f64);
        initial.push(linalg::scaled(r, &u));
    }

    let mut directions = Vec::new();
    let b_norm = linalg::norm(&prob.b);
    if b_norm > 0.0 {
        directions.push(linalg::scaled(1.0 / b_norm, &prob.b));
        directions.push(linalg::scaled(-1.0 / b_norm, &prob.b));
    }
    for _ in 0..SCAN_DIRECTIONS {
        directions.push(random_unit(&mut rng, n));
    }
    for d in &directions {
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=SCAN_POINTS {
            let s = radius * k as f64 / SCAN_POINTS as f64;
            let v = evaluate_objective(prob, &linalg::scaled(s, d));
            if v < best.0 {
                best = (v, s);
            }
        }
        initial.push(linalg::scaled(best.1, d));
    }

    let (p, rho) = (prob.p, prob.rho);
    let gtol = GRAD_TOL * (1.0 + norm_a + b_norm + rho);
    let f = |x: &[f64]| evaluate_objective(prob, x);
    let grad = |x: &[f64]| {
        let r2 = linalg::norm_sq(x);
        let coef = rho * p * libm::pow(r2, (p - 2.0) / 2.0);
        let ax = prob.a.mul_vec(x);
        (0..x.len()).map(|i| 2.0 * ax[i] + prob.b[i] + coef * x[i]).collect::<Vec<_>>()
    };
    let total = initial.len();
    let results: Vec<(Vec<f64>, f64)> = initial.into_iter().map(|x0| descend(f, grad, x0, gtol)).collect();
    let (best_start_index, x, _, spread) = pick_best(results);
    OracleReport { value: evaluate_objective(prob, &x), x, starts: total, best_start_index, spread }
}

pub fn oracle_be(prob: &BeProblem, starts: usize, seed: u64) -> OracleReport {
    let n = prob.a.cols();
    let norm_a = spectral_norm(&prob.a);
    let b_norm = linalg::norm(&prob.b);
    let base = if b_norm > 0.0 { b_norm / norm_a } else { 1.0 };
    let radii = [0.1 * base, base, 10.0 * base];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let ratio_sq = |x: &[f64]| {
        let den = norm_a * linalg::norm(x) + b_norm;
        linalg::norm_sq(&prob.residual(x)) / (den * den)
    };
    let grad = |x: &[f64]| {
        let r = prob.residual(x);
        let nx = linalg::norm(x);
        let den = norm_a * nx + b_norm;
        let num = linalg::norm_sq(&r);
        let mut g = linalg::scaled(2.0 / (den * den), &prob.a.tr_mul_vec(&r));
        if nx > 0.0 {
            linalg::axpy(-2.0 * num * norm_a / (nx * den * den * den), x, &mut g);
        }
        g
    };

    let per = starts.max(1);
    let mut initial = Vec::with_capacity(per * radii.len());
    for k in 0..per {
        let r = radii[k % radii.len()];
        initial.push(linalg::scaled(r, &random_unit(&mut rng, n)));
    }
    let total = initial.len();
    let gtol = GRAD_TOL / (1.0 + base);
    let results: Vec<(Vec<f64>, f64)> = initial
        .into_iter()
        .map(|x0| descend(ratio_sq, grad, x0, gtol))
        .map(|(x, v)| (x, libm::sqrt(v.max(0.0))))
        .collect();
    let (best_start_index, x, _, spread) = pick_best(results);
    let value = libm::sqrt(ratio_sq(&x).max(0.0));
    OracleReport { value, x, starts: total, best_start_index, spread }
}
