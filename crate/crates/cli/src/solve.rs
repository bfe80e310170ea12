use std::time::Instant;

use hcx_core::backward_error::solve_be;
use hcx_core::prs::solve_prs;
use hcx_core::{Error, SolverOptions};

use crate::error::Result;
use crate::output::{DualSummary, ResultFile, Status};
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub options: SolverOptions,
    /// Record `wall_time_ms`; off gives byte-identical output across runs.
    pub timing: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { options: SolverOptions::default(), timing: true }
    }
}

fn empty(problem: &Problem, status: Status, message: String) -> ResultFile {
    ResultFile {
        status,
        kind: problem.kind(),
        value: None,
        x: None,
        dual: None,
        certificate: None,
        iterations: 0,
        wall_time_ms: None,
        z_star: None,
        case: None,
        path: None,
        dual_gap_bound: None,
        message: Some(message),
    }
}

/// Runs the matching solver. Solver failures that have a status of their
/// own (degenerate, no convergence) become a [`ResultFile`]; everything else
/// is an error.
pub fn solve(problem: &Problem, cfg: &SolveConfig) -> Result<ResultFile> {
    let start = Instant::now();
    let outcome = match problem {
        Problem::Prs(prob) => solve_prs(prob, &cfg.options).map(|s| ResultFile {
            status: Status::Optimal,
            kind: problem.kind(),
            value: Some(s.value),
            x: Some(s.x),
            dual: Some(DualSummary { lambda: s.lambda_star, t: Some(s.value), w: None }),
            certificate: Some((&s.certificate).into()),
            iterations: s.iterations,
            wall_time_ms: None,
            z_star: Some(s.z_star),
            case: Some(s.case),
            path: None,
            dual_gap_bound: Some(s.dual_gap_bound),
            message: None,
        }),
        Problem::Be(prob) => solve_be(prob, &cfg.options).map(|s| ResultFile {
            status: Status::Optimal,
            kind: problem.kind(),
            value: Some(s.ratio),
            x: Some(s.x),
            dual: Some(DualSummary { lambda: s.lambda_star, t: None, w: Some(s.w_star) }),
            certificate: Some((&s.certificate).into()),
            iterations: s.iterations,
            wall_time_ms: None,
            z_star: Some(s.z_star),
            case: None,
            path: Some(s.path),
            dual_gap_bound: None,
            message: None,
        }),
    };
    let mut result = match outcome {
        Ok(r) => r,
        Err(e @ Error::DegenerateInstance(_)) => empty(problem, Status::Degenerate, e.to_string()),
        Err(e @ Error::NoConvergence { iterations, best_lambda }) => {
            let mut r = empty(problem, Status::NoConvergence, e.to_string());
            r.iterations = iterations;
            r.dual = Some(DualSummary { lambda: best_lambda, t: None, w: None });
            r
        }
        Err(e) => return Err(e.into()),
    };
    if result.status == Status::Optimal && result.certificate.as_ref().is_some_and(|c| !c.verdict) {
        // "optimal" is reserved for certified solutions
        result.status = Status::NoConvergence;
        result.message = Some("solution found but its certificate was rejected".into());
    }
    if cfg.timing {
        result.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(result)
}
