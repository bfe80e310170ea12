use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use hcx::dualplot::{dual_curve, write_csv};
use hcx::error::ErrorReport;
use hcx::generate::{generate, GenParams};
use hcx::output::{to_json, CertificateFile, Status};
use hcx::problem::{load_problem, Kind, PairFile};
use hcx::solve::{solve, SolveConfig};
use hcx::{run_oracle, solve_batch, verify, CertParam, CliError, Result, DEFAULT_TOL};
use hcx_core::certificates::joint_range_probe;
use hcx_core::SolverOptions;

/// Global solver for p-regularized subproblems and the normwise backward
/// error, with PSD certificates.
#[derive(Debug, Parser)]
#[command(name = "hcx", version)]
struct Cli {
    /// Write the output here instead of stdout (a directory for --batch).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// PSD verification tolerance.
    #[arg(long, global = true, env = "HCX_DEFAULT_TOL")]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a problem file and print its ResultFile.
    Solve {
        #[arg(required_unless_present = "batch", conflicts_with = "batch")]
        input: Option<PathBuf>,
        /// Solve every *.json problem in this directory.
        #[arg(long)]
        batch: Option<PathBuf>,
        /// Leave wall_time_ms null so repeated runs are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// Run the multi-start reference solver.
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        starts: usize,
    },
    /// Check the PSD certificate at user-supplied multipliers.
    Verify {
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "w", conflicts_with = "w")]
        t: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        w: Option<f64>,
    },
    /// Emit a seeded random ProblemFile.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        /// Rows of A for backward-error instances (default n + 1).
        #[arg(long)]
        m: Option<usize>,
        /// Force the hard case (prs only).
        #[arg(long)]
        hard: bool,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Sample the dual function as CSV `lambda,value`.
    Dualplot {
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Probe the convexity of the joint range of two quadratics.
    Probe {
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let options = SolverOptions { psd_tol: tol, ..SolverOptions::default() };
    let out = cli.out.as_deref();

    match cli.command {
        Command::Solve { input, batch, no_timing } => {
            let cfg = SolveConfig { options, timing: !no_timing };
            if let Some(dir) = batch {
                let items = solve_batch(&dir, out.unwrap_or(&dir), &cfg)?;
                for item in &items {
                    println!("{}\t{}", item.output.display(), to_json(&item.result.status).trim());
                }
                let worst = items.iter().map(|i| i.result.status).find(|s| *s != Status::Optimal);
                return Ok(worst.map_or(0, |s| s.exit_code() as u8));
            }
            let input = input.expect("clap enforces input or --batch");
            let result = solve(&load_problem(&input)?, &cfg)?;
            emit(out, &to_json(&result))?;
            Ok(result.status.exit_code() as u8)
        }
        Command::Oracle { input, starts } => {
            let report = run_oracle(&load_problem(&input)?, starts, cli.seed);
            emit(out, &to_json(&report))?;
            Ok(0)
        }
        Command::Verify { input, lambda, t, w } => {
            let param = match (t, w) {
                (Some(t), None) => CertParam::T(t),
                (None, Some(w)) => CertParam::W(w),
                _ => return Err(CliError::Invalid("give exactly one of --t and --w".into())),
            };
            let report = verify(&load_problem(&input)?, lambda, param, tol)?;
            emit(out, &to_json(&CertificateFile::from(&report)))?;
            Ok(0)
        }
        Command::Gen { kind, n, m, hard, p } => {
            let file = generate(&GenParams { kind, n, m, seed: cli.seed, hard, p })?;
            emit(out, &to_json(&file))?;
            Ok(0)
        }
        Command::Dualplot { input, grid } => {
            let curve = dual_curve(&load_problem(&input)?, grid, &options)?;
            let mut buf = Vec::new();
            write_csv(&mut buf, &curve)?;
            emit(out, &String::from_utf8(buf).expect("CSV of formatted floats"))?;
            Ok(0)
        }
        Command::Probe { input, samples, trials } => {
            let pair = PairFile::load(&input)?.to_pair()?;
            let report = joint_range_probe(&pair, samples, trials, cli.seed)?;
            emit(out, &to_json(&report))?;
            Ok(0)
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprint!("{}", to_json(&ErrorReport::from(e)));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.render().to_string().trim().to_string())),
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => fail(&e),
    }
}
