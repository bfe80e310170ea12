use std::io::Write;

use hcx_core::backward_error::BeDual;
use hcx_core::prs::{solve_prs, PrsDual};
use hcx_core::{Error, SolverOptions};

use crate::error::{CliError, Result};
use crate::output::fmt_f64;
use crate::problem::Problem;

/// `k` admissible samples `(λ, dual(λ))`, increasing in λ.
///
/// p-RS samples span `[lower, lower + max(2(λ* − lower), 1)]`, dropping the
/// left end when it is excluded from the domain. Backward-error samples
/// cover the admissible interval `(0, right)` or `(0, right]`.
pub fn dual_curve(problem: &Problem, k: usize, opts: &SolverOptions) -> Result<Vec<(f64, f64)>> {
    if k == 0 {
        return Err(CliError::Invalid("grid must have at least one point".into()));
    }
    let kf = k as f64;
    match problem {
        Problem::Prs(prob) => {
            let dual = PrsDual::new(prob, opts.hard_case_tol)?;
            let lower = dual.lower_bound();
            let width = match solve_prs(prob, opts) {
                Ok(sol) => (2.0 * (sol.lambda_star - lower)).max(1.0),
                Err(_) => 1.0,
            };
            (0..k)
                .map(|i| {
                    let frac = if dual.is_open() {
                        (i as f64 + 1.0) / kf
                    } else if k == 1 {
                        0.0
                    } else {
                        i as f64 / (kf - 1.0)
                    };
                    let lambda = lower + width * frac;
                    Ok((lambda, dual.value(lambda)?))
                })
                .collect()
        }
        Problem::Be(prob) => {
            let dual = BeDual::new(prob, opts.hard_case_tol)?;
            let (_, right, closed) = dual.interval();
            if right.is_nan() || right <= 0.0 {
                return Err(Error::DegenerateInstance("the dual has no admissible multiplier".into()).into());
            }
            (0..k)
                .map(|i| {
                    let frac = if closed { (i as f64 + 1.0) / kf } else { (i as f64 + 0.5) / kf };
                    let lambda = right * frac;
                    Ok((lambda, dual.value(lambda)?))
                })
                .collect()
        }
    }
}

pub fn write_csv<W: Write>(out: W, curve: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "value"])?;
    for (l, v) in curve {
        w.write_record([fmt_f64(*l), fmt_f64(*v)])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
