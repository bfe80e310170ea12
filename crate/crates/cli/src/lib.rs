//! Command-line front end for `hcx-core`: problem files, result files,
//! instance generation and dual-curve export.

pub mod dualplot;
pub mod error;
pub mod generate;
pub mod mm;
pub mod output;
pub mod problem;
pub mod solve;

use std::path::{Path, PathBuf};

use hcx_core::certificates::{be_certificate, prs_certificate, CertificateReport};
use hcx_core::oracle::{oracle_be, oracle_prs, OracleReport};
use rayon::prelude::*;

pub use error::{CliError, Result};
use output::{ResultFile, Status};
use problem::{load_problem, Kind, Problem};
use solve::{solve, SolveConfig};

/// Verification tolerance used when neither `--tol` nor `HCX_DEFAULT_TOL`
/// is set.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Certificate parameter: `t` for p-RS, `w` for backward error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CertParam {
    T(f64),
    W(f64),
}

pub fn verify(problem: &Problem, lambda: f64, param: CertParam, tol: f64) -> Result<CertificateReport> {
    match (problem, param) {
        (Problem::Prs(p), CertParam::T(t)) => Ok(prs_certificate(p, lambda, t, tol)?),
        (Problem::Be(p), CertParam::W(w)) => Ok(be_certificate(p, lambda, w, tol)?),
        (Problem::Prs(_), CertParam::W(_)) => Err(CliError::Invalid("prs certificates take --t, not --w".into())),
        (Problem::Be(_), CertParam::T(_)) => Err(CliError::Invalid("be certificates take --w, not --t".into())),
    }
}

pub fn run_oracle(problem: &Problem, starts: usize, seed: u64) -> OracleReport {
    match problem {
        Problem::Prs(p) => oracle_prs(p, starts, seed),
        Problem::Be(p) => oracle_be(p, starts, seed),
    }
}

/// Result of one file in a batch, with the path it was written to.
#[derive(Debug)]
pub struct BatchItem {
    pub input: PathBuf,
    pub output: PathBuf,
    pub result: ResultFile,
}

fn failed(kind: Kind, e: &CliError) -> ResultFile {
    ResultFile {
        status: Status::Error,
        kind,
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
        message: Some(e.to_string()),
    }
}

/// Solves every `*.json` file in `dir` concurrently and writes
/// `<stem>.result.json` into `out_dir`. Items come back sorted by input
/// name; a file that fails to load gets a result with status `error`.
pub fn solve_batch(dir: &Path, out_dir: &Path, cfg: &SolveConfig) -> Result<Vec<BatchItem>> {
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".result.json")
        })
        .collect();
    inputs.sort();
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    inputs
        .into_par_iter()
        .map(|input| {
            let result = match load_problem(&input) {
                Ok(problem) => solve(&problem, cfg).unwrap_or_else(|e| failed(problem.kind(), &e)),
                // the kind is unknown if the file does not parse
                Err(e) => failed(problem::ProblemFile::load(&input).map(|f| f.kind).unwrap_or(Kind::Prs), &e),
            };
            let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
            let output = out_dir.join(format!("{stem}.result.json"));
            std::fs::write(&output, output::to_json(&result)).map_err(|e| CliError::io(&output, e))?;
            Ok(BatchItem { input, output, result })
        })
        .collect()
}
