use std::path::Path;
use std::process::{Command, Output};

use nscraig_core::problems::{save_system, save_vector};
use nscraig_core::{SaddleSystem, SparseMatrixCSR};
use serde_json::Value;

fn nscraig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nscraig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn synthetic_run_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = nscraig(&[
        "run", "--problem", "synthetic", "--m", "60", "--n", "20", "--seed", "1", "--solver",
        "nscraig", "--tol", "1e-3", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let s = summary(&out);
    assert_eq!(s["solver"], "nscraig");
    assert_eq!(s["termination"], "converged");
    assert_eq!(s["problem_digest"].as_str().unwrap().len(), 64);
    let iters = s["iterations"].as_u64().unwrap() as usize;
    assert_eq!(s["memory_estimate"].as_u64().unwrap() as usize, 60 + 20 * (iters + 1));
    let fr = &s["final_residuals"];
    assert!(fr["dual"].as_f64().unwrap() <= 10.0 * 1e-3 * fr["rhs_norm"].as_f64().unwrap());
    assert!(fr["primal"].as_f64().unwrap() < 1e-10);

    let rows = csv_rows(&out.join("history.csv"));
    assert_eq!(rows[0], ["iter", "rel_residual", "error_estimate"]);
    assert_eq!(rows.len() - 1, iters);
    let res: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(*res.last().unwrap() <= 1e-3);
    assert!(res[..res.len() - 1].iter().all(|r| *r > 1e-3));
    // 17 significant digits
    assert_eq!(rows[1][1].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn validate_adds_explicit_column() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nscraig(&[
        "run", "--seed", "4", "--tol", "1e-8", "--validate", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&tmp.path().join("history.csv"));
    assert_eq!(rows[0], ["iter", "rel_residual", "rel_residual_explicit", "error_estimate"]);
    for r in &rows[1..] {
        let (rec, ex): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((rec - ex).abs() <= 1e-8, "{r:?}");
    }
    // estimates start at the delay
    assert!(rows[4][3].is_empty());
    assert!(!rows[5][3].is_empty());
}

#[test]
fn every_solver_writes_one_row_per_iteration() {
    let tmp = tempfile::tempdir().unwrap();
    for solver in ["nscraig", "fom", "gmres"] {
        let out = tmp.path().join(solver);
        let o = nscraig(&[
            "run", "--m", "120", "--n", "30", "--seed", "2", "--solver", solver, "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{solver}");
        let s = summary(&out);
        let rows = csv_rows(&out.join("history.csv"));
        assert_eq!(rows.len() - 1, s["iterations"].as_u64().unwrap() as usize, "{solver}");
        let fr = &s["final_residuals"];
        assert!(fr["dual_relative"].as_f64().unwrap() <= 1e-2, "{solver}");
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["run", "--tol", "0"][..],
        &["run", "--solver", "cg"],
        &["run", "--stop", "sometimes"],
        &["run", "--solver", "fom", "--restart", "4"],
        &["run", "--problem", "file"],
        &["run", "--problem", "synthetic", "--m", "10", "--n", "10"],
        &["frobnicate"],
    ] {
        let tmp = tempfile::tempdir().unwrap();
        let mut full = args.to_vec();
        full.extend(["--out", tmp.path().to_str().unwrap()]);
        let o = nscraig(if args[0] == "frobnicate" { args } else { &full });
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn maxit_and_breakdown_have_distinct_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nscraig(&["run", "--maxit", "2", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert_eq!(summary(tmp.path())["termination"], "maxit_reached");

    // M negative definite: the first M-norm is undefined
    let dir = tmp.path().join("indefinite");
    let m = SparseMatrixCSR::from_diagonal(&[-1.0, -2.0, -3.0]);
    let a = SparseMatrixCSR::from_dense(&[vec![1.0], vec![1.0], vec![0.0]]);
    save_system(&dir, &SaddleSystem::new(m, a, vec![1.0]).unwrap(), None).unwrap();
    let o = nscraig(&[
        "run", "--problem", "file", "--path", dir.to_str().unwrap(), "--out",
        tmp.path().join("b").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn restart_auto_uses_paired_run() {
    let tmp = tempfile::tempdir().unwrap();
    let pair = tmp.path().join("pair");
    let gm = tmp.path().join("gm");
    let base = ["--problem", "synthetic", "--m", "80", "--n", "40", "--seed", "6"];
    let run = |extra: &[&str], out: &Path| {
        let mut args = vec!["run"];
        args.extend(base);
        args.extend(extra);
        args.extend(["--out", out.to_str().unwrap()]);
        nscraig(&args)
    };
    assert_eq!(code(&run(&[], &pair)), 0);
    assert_eq!(code(&run(&["--solver", "gmres", "--restart", "auto"], &gm)), 0);
    let it = summary(&pair)["iterations"].as_u64().unwrap();
    let cfg = summary(&gm)["config"].clone();
    assert_eq!(cfg["paired_nscraig_iterations"].as_u64(), Some(it));
    assert_eq!(cfg["restart"].as_u64(), Some(it * 40 / 120));
}

#[test]
fn compare_protocol_on_oseen() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nscraig(&["compare", "--problem", "oseen", "--grid", "8", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("comparison.csv"));
    assert_eq!(rows[0][..5], ["solver", "iterations", "termination", "memory_estimate", "memory_ratio"]);
    let get = |name: &str| rows.iter().find(|r| r[0] == name).unwrap().clone();
    let (ns, fom, gm) = (get("nscraig"), get("fom"), get("gmres"));
    assert_eq!(ns[1], fom[1]);
    let mem = |r: &Vec<String>| r[3].parse::<f64>().unwrap();
    let ratio: f64 = gm[4].parse().unwrap();
    assert!((ratio - mem(&gm) / mem(&ns)).abs() <= 1e-15 * ratio);
    let restarted = get("gmres_restarted");
    if !restarted[1].is_empty() {
        assert!(restarted[1].parse::<usize>().unwrap() >= gm[1].parse::<usize>().unwrap());
    }

    let hist = csv_rows(&tmp.path().join("histories.csv"));
    let count = |s: &str| hist.iter().filter(|r| r[0] == s).count();
    assert_eq!(count("nscraig"), ns[1].parse::<usize>().unwrap());
    assert_eq!(count("gmres"), gm[1].parse::<usize>().unwrap());
    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("comparison.json")).unwrap())
            .unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn generated_files_reproduce_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let sys_dir = tmp.path().join("sys");
    let gen = ["--problem", "synthetic", "--m", "50", "--n", "15", "--seed", "8"];
    let mut args = vec!["generate"];
    args.extend(gen);
    args.extend(["--out", sys_dir.to_str().unwrap()]);
    assert_eq!(code(&nscraig(&args)), 0);
    assert!(sys_dir.join("validation.json").exists());

    let direct = tmp.path().join("direct");
    let mut args = vec!["run", "--tol", "1e-10"];
    args.extend(gen);
    args.extend(["--out", direct.to_str().unwrap()]);
    assert_eq!(code(&nscraig(&args)), 0);

    let loaded = tmp.path().join("loaded");
    let o = nscraig(&[
        "run", "--tol", "1e-10", "--problem", "file", "--path", sys_dir.to_str().unwrap(),
        "--out", loaded.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let (a, b) = (summary(&direct), summary(&loaded));
    assert_eq!(a["iterations"], b["iterations"]);
    assert_eq!(a["report"]["residual_history"], b["report"]["residual_history"]);
}

#[test]
fn general_rhs_is_reduced_and_shifted_back() {
    let tmp = tempfile::tempdir().unwrap();
    let sys_dir = tmp.path().join("sys");
    let o = nscraig(&[
        "generate", "--m", "40", "--n", "12", "--seed", "5", "--out", sys_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let b1: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
    save_vector(sys_dir.join("b1.mtx"), &b1).unwrap();

    let out = tmp.path().join("run");
    let o = nscraig(&[
        "run", "--tol", "1e-12", "--problem", "file", "--path", sys_dir.to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fr = summary(&out)["final_residuals"].clone();
    assert!(fr["primal"].as_f64().unwrap() < 1e-10, "{fr}");
    assert!(fr["dual"].as_f64().unwrap() < 1e-10, "{fr}");
}
