use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hcx::generate::{generate, GenParams};
use hcx::output::{to_json, CertificateFile, ResultFile, Status};
use hcx::problem::{Kind, ProblemFile};
use hcx::solve::{solve, SolveConfig};
use hcx_core::oracle::OracleReport;
use hcx_core::prs::PrsCase;
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcx")).args(args).env_remove("HCX_DEFAULT_TOL").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_file(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let p = dir.path().join(name);
    let mut all = vec!["gen", "--out", s(&p)];
    all.extend_from_slice(args);
    ok(&all);
    p
}

#[test]
fn solve_closed_form_prs() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"kind":"prs","A":[[-1,0],[0,-1]],"b":[0,0],"p":4}"#);
    let r: ResultFile = serde_json::from_str(&ok(&["solve", s(&p)])).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert!((r.value.unwrap() + 0.25).abs() < 1e-12);
    assert_eq!(r.case, Some(PrsCase::Hard));
    assert!(r.certificate.unwrap().verdict);
    assert!(r.wall_time_ms.is_some());
}

#[test]
fn solve_consistent_be() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "b.json", r#"{"kind":"be","A":[[1,2],[3,4]],"b":[5,6]}"#);
    let r: ResultFile = serde_json::from_str(&ok(&["solve", s(&p)])).unwrap();
    assert_eq!(r.status, Status::Optimal);
    assert_eq!(r.value, Some(0.0));
}

#[test]
fn solve_matches_oracle_command() {
    let dir = TempDir::new().unwrap();
    for (kind, seed) in [("prs", "3"), ("prs", "8"), ("be", "4")] {
        let p = gen_file(&dir, &format!("{kind}{seed}.json"), &["--kind", kind, "--n", "3", "--seed", seed]);
        let r: ResultFile = serde_json::from_str(&ok(&["solve", s(&p)])).unwrap();
        let o: OracleReport = serde_json::from_str(&ok(&["oracle", s(&p), "--starts", "20", "--seed", "1"])).unwrap();
        let v = r.value.unwrap();
        assert!((v - o.value).abs() <= 1e-5 * (1.0 + v.abs()), "{kind} {seed}: {v} vs {}", o.value);
    }
}

#[test]
fn verify_brackets_the_optimum() {
    let dir = TempDir::new().unwrap();
    let p = gen_file(&dir, "p.json", &["--kind", "prs", "--n", "4", "--seed", "12"]);
    let r: ResultFile = serde_json::from_str(&ok(&["solve", s(&p)])).unwrap();
    let dual = r.dual.unwrap();
    let (l, t) = (dual.lambda.to_string(), dual.t.unwrap());
    let at: CertificateFile = serde_json::from_str(&ok(&["verify", s(&p), "--lambda", &l, "--t", &t.to_string()])).unwrap();
    assert!(at.summary.verdict);
    let above = (t + 1e-3 * (1.0 + t.abs())).to_string();
    let off: CertificateFile = serde_json::from_str(&ok(&["verify", s(&p), "--lambda", &l, "--t", &above])).unwrap();
    assert!(!off.summary.verdict);
    assert_eq!(off.block_matrix.len(), 5);

    let b = gen_file(&dir, "b.json", &["--kind", "be", "--n", "2", "--seed", "5"]);
    let r: ResultFile = serde_json::from_str(&ok(&["solve", s(&b)])).unwrap();
    let dual = r.dual.unwrap();
    let w = dual.w.unwrap().to_string();
    let at: CertificateFile = serde_json::from_str(&ok(&["verify", s(&b), "--lambda", &dual.lambda.to_string(), "--w", &w])).unwrap();
    assert!(at.summary.verdict);
}

#[test]
fn verify_trivially_psd() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"kind":"prs","A":[[1,0],[0,2]],"b":[0,0],"p":3}"#);
    let c: CertificateFile = serde_json::from_str(&ok(&["verify", s(&p), "--lambda", "0", "--t", "-1"])).unwrap();
    assert!(c.summary.verdict);
    // t must go with prs, w with be
    assert_eq!(run(&["verify", s(&p), "--lambda", "0", "--w", "1"]).status.code(), Some(1));
}

#[test]
fn optimal_results_reverify() {
    let dir = TempDir::new().unwrap();
    for seed in 0..6 {
        let hard = if seed % 2 == 0 { vec!["--hard"] } else { vec![] };
        let mut args = vec!["--kind", "prs", "--n", "5"];
        let seed_s = seed.to_string();
        args.extend(["--seed", &seed_s]);
        args.extend(hard);
        let p = gen_file(&dir, &format!("p{seed}.json"), &args);
        let r: ResultFile = serde_json::from_str(&ok(&["solve", s(&p)])).unwrap();
        assert_eq!(r.status, Status::Optimal);
        let d = r.dual.unwrap();
        let c: CertificateFile = serde_json::from_str(&ok(&[
            "verify",
            s(&p),
            "--lambda",
            &d.lambda.to_string(),
            "--t",
            &d.t.unwrap().to_string(),
        ]))
        .unwrap();
        assert!(c.summary.verdict, "seed {seed}");
    }
}

#[test]
fn gen_determinism_dimensions_and_hard() {
    let a = ok(&["gen", "--kind", "be", "--n", "3", "--m", "5", "--seed", "9"]);
    assert_eq!(a, ok(&["gen", "--kind", "be", "--n", "3", "--m", "5", "--seed", "9"]));
    let f: ProblemFile = serde_json::from_str(&a).unwrap();
    assert_eq!((f.a.as_ref().unwrap().len(), f.a.as_ref().unwrap()[0].len(), f.b.len()), (5, 3, 5));

    let dir = TempDir::new().unwrap();
    let p = gen_file(&dir, "h.json", &["--kind", "prs", "--n", "6", "--seed", "2", "--hard", "--p", "3.5"]);
    let r: ResultFile = serde_json::from_str(&ok(&["solve", s(&p)])).unwrap();
    assert_eq!(r.case, Some(PrsCase::Hard));
    assert_eq!(run(&["gen", "--kind", "be", "--n", "2", "--hard"]).status.code(), Some(1));
}

#[test]
fn gen_round_trip_solves() {
    let cfg = SolveConfig { timing: false, ..SolveConfig::default() };
    for seed in 0..1000u64 {
        for kind in [Kind::Prs, Kind::Be] {
            let n = 1 + (seed % 8) as usize;
            let params = GenParams { kind, n, m: None, seed, hard: kind == Kind::Prs && seed % 3 == 0, p: None };
            let text = to_json(&generate(&params).unwrap());
            let file: ProblemFile = serde_json::from_str(&text).unwrap();
            let problem = file.to_problem(Path::new(".")).unwrap();
            let r = solve(&problem, &cfg).unwrap_or_else(|e| panic!("{kind:?} seed {seed}: {e}"));
            assert_eq!(r.status, Status::Optimal, "{kind:?} seed {seed}: {:?}", r.message);
        }
    }
}

#[test]
fn dualplot_rows_and_shape() {
    let dir = TempDir::new().unwrap();
    for (kind, sign) in [("prs", 1.0), ("be", -1.0)] {
        let p = gen_file(&dir, &format!("{kind}.json"), &["--kind", kind, "--n", "3", "--seed", "21"]);
        let r: ResultFile = serde_json::from_str(&ok(&["solve", s(&p)])).unwrap();
        let lambda_star = r.dual.unwrap().lambda;
        let csv = ok(&["dualplot", s(&p), "--grid", "64"]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("lambda,value"));
        let rows: Vec<(f64, f64)> = lines
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 64);
        // prs dual rises then falls around λ*; the be dual falls then rises
        for w in rows.windows(2) {
            let slope = sign * (w[1].1 - w[0].1);
            if w[1].0 < lambda_star {
                assert!(slope > 0.0, "{kind}: {w:?}");
            } else if w[0].0 > lambda_star {
                assert!(slope < 0.0, "{kind}: {w:?}");
            }
        }
    }
}

#[test]
fn probe_parabola_is_not_convex() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pair.json", r#"{"A":[[1]],"B":[[0]],"b":[1]}"#);
    let v: Value = serde_json::from_str(&ok(&["probe", s(&p), "--trials", "20", "--seed", "3"])).unwrap();
    assert!(v["fraction"].as_f64().unwrap() < 1.0);
    assert_eq!(v["trials"], 20);
    let h = write(&dir, "hom.json", r#"{"A":[[1,0],[0,-1]],"B":[[0,1],[1,0]]}"#);
    let v: Value = serde_json::from_str(&ok(&["probe", s(&h), "--trials", "20"])).unwrap();
    assert_eq!(v["fraction"].as_f64(), Some(1.0));
    assert_eq!(run(&["probe", s(&h), "--samples", "10"]).status.code(), Some(1));
}

#[test]
fn exit_codes_and_error_json() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"kind":"prs","A":[[1,2]],"b":[0],"p":3}"#);
    let out = run(&["solve", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["status"], "error");
    assert_eq!(err["error"], "invalid_input");

    let garbled = write(&dir, "garbled.json", "{not json");
    let err: Value = serde_json::from_slice(&run(&["solve", s(&garbled)]).stderr).unwrap();
    assert_eq!(err["error"], "json");

    let degenerate = write(&dir, "d.json", r#"{"kind":"be","A":[[1,0],[0,0]],"b":[1,1]}"#);
    let out = run(&["solve", s(&degenerate)]);
    assert_eq!(out.status.code(), Some(2));
    let r: ResultFile = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.status, Status::Degenerate);

    let usage = run(&["solve", "--bogus"]);
    assert_eq!(usage.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&usage.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn matrix_market_and_out_flag() {
    let dir = TempDir::new().unwrap();
    write(&dir, "a.mtx", "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 -1\n2 2 -1\n3 3 -1\n");
    let p = write(&dir, "p.json", r#"{"kind":"prs","A_mm":"a.mtx","b":[0,0,0],"p":4}"#);
    let out = dir.path().join("r.json");
    assert_eq!(ok(&["solve", s(&p), "--out", s(&out)]), "");
    let r: ResultFile = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!((r.value.unwrap() + 0.25).abs() < 1e-12);
}

#[test]
fn tolerance_from_env_and_flag() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.json", r#"{"kind":"prs","A":[[1]],"b":[0],"p":3}"#);
    let tol_of = |out: Output| -> f64 {
        let c: CertificateFile = serde_json::from_slice(&out.stdout).unwrap();
        c.summary.tolerance
    };
    let args = ["verify", s(&p), "--lambda", "0", "--t", "0"];
    // block max-abs entry is 1, so the absolute tolerance is 2·tol
    assert_eq!(tol_of(run(&args)), 2e-8);
    let env = Command::new(env!("CARGO_BIN_EXE_hcx")).args(args).env("HCX_DEFAULT_TOL", "1e-4").output().unwrap();
    assert_eq!(tol_of(env), 2e-4);
    let both = Command::new(env!("CARGO_BIN_EXE_hcx"))
        .args(args)
        .args(["--tol", "1e-6"])
        .env("HCX_DEFAULT_TOL", "1e-4")
        .output()
        .unwrap();
    assert_eq!(tol_of(both), 2e-6);
    assert_eq!(run(&["verify", s(&p), "--lambda", "0", "--t", "0", "--tol", "-1"]).status.code(), Some(1));
}

#[test]
fn batch_mode_names_outputs_after_inputs() {
    let dir = TempDir::new().unwrap();
    gen_file(&dir, "one.json", &["--kind", "prs", "--n", "3", "--seed", "1"]);
    gen_file(&dir, "two.json", &["--kind", "be", "--n", "2", "--seed", "2"]);
    write(&dir, "three.json", r#"{"kind":"be","A":[[1,0],[0,0]],"b":[1,1]}"#);
    let out_dir = dir.path().join("results");
    let out = run(&["solve", "--batch", s(dir.path()), "--out", s(&out_dir), "--no-timing"]);
    assert_eq!(out.status.code(), Some(2), "first non-optimal file decides the exit code");
    for (name, status) in [("one", Status::Optimal), ("two", Status::Optimal), ("three", Status::Degenerate)] {
        let text = std::fs::read_to_string(out_dir.join(format!("{name}.result.json"))).unwrap();
        let r: ResultFile = serde_json::from_str(&text).unwrap();
        assert_eq!(r.status, status, "{name}");
    }
}
