//! End-to-end tests of the `crossval` binary: output shapes, exit codes,
//! and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crossval"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn split_lpo_emits_six_splits() {
    let out = run(&["split", "--n", "4", "--scheme", "lpo", "--p", "2"]);
    assert!(out.status.success());
    let plan: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(plan["splits"].as_array().unwrap().len(), 6);
}

#[test]
fn split_vfold_reports_inexact_reg() {
    let out = run(&["split", "--n", "5", "--scheme", "vfold", "--v", "2", "--seed", "1"]);
    assert!(out.status.success());
    let plan: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(plan["reg_exact"], serde_json::Value::Bool(false));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed = 1"));
}

#[test]
fn split_is_byte_identical_across_runs() {
    let args = ["split", "--n", "10", "--scheme", "mc", "--v", "4", "--ne", "6", "--seed", "9"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn split_budget_error_names_the_count() {
    let out = run(&["split", "--n", "30", "--scheme", "lpo", "--p", "15"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("155117520"), "stderr: {err}");
    assert!(err.contains("1000000"), "stderr: {err}");
}

fn write_linear_csv(dir: &Path) -> PathBuf {
    // y = 2x exactly: interpolated by least squares.
    let path = dir.join("linear.csv");
    std::fs::write(
        &path,
        "#kind=regression,d=1\nx1,y\n0.1,0.2\n0.3,0.6\n0.5,1\n0.7,1.4\n0.9,1.8\n",
    )
    .unwrap();
    path
}

#[test]
fn estimate_loo_on_perfect_fit_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_linear_csv(dir.path());
    let out = run(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--rule",
        "ols",
        "--contrast",
        "quadratic",
        "--scheme",
        "loo",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["value"].as_f64().unwrap().abs() < 1e-18);
    // Risk reporting defaults to the corrected criterion.
    assert_eq!(report["criterion"], "corrected_cv");
}

#[test]
fn estimate_corrected_equals_plain_for_data_ignoring_rule() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    std::fs::write(
        &path,
        "#kind=density,d=1\nx1\n0.1\n0.4\n0.52\n0.6\n0.8\n0.33\n0.9\n0.05\n",
    )
    .unwrap();
    let base = [
        "estimate",
        "--data",
        path.to_str().unwrap(),
        "--rule",
        "hist:h=1",
        "--contrast",
        "density-ls",
        "--scheme",
        "vfold",
        "--v",
        "2",
        "--seed",
        "3",
    ];
    let corrected = run(&[&base[..], &["--corrected", "true"]].concat());
    let plain = run(&[&base[..], &["--corrected", "false"]].concat());
    assert!(corrected.status.success() && plain.status.success());
    let c: serde_json::Value = serde_json::from_str(&stdout(&corrected)).unwrap();
    let p: serde_json::Value = serde_json::from_str(&stdout(&plain)).unwrap();
    assert_eq!(c["value"], p["value"]);
}

#[test]
fn estimate_accepts_a_plan_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_linear_csv(dir.path());
    let plan_path = dir.path().join("plan.json");
    let plan_out = run(&[
        "split", "--n", "5", "--scheme", "vfold", "--v", "5", "--seed", "2", "--out",
        plan_path.to_str().unwrap(),
    ]);
    assert!(plan_out.status.success());
    let out = run(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--rule",
        "ols",
        "--contrast",
        "quadratic",
        "--plan",
        plan_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn estimate_unknown_rule_exits_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_linear_csv(dir.path());
    let out = run(&[
        "estimate",
        "--data",
        data.to_str().unwrap(),
        "--rule",
        "forest",
        "--contrast",
        "quadratic",
        "--scheme",
        "loo",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown rule"), "stderr: {err}");
    assert!(err.contains("usage"), "stderr: {err}");
}

#[test]
fn estimate_degenerate_leverage_exits_3() {
    // Leave-one-out on a 2-point design where one x is 0: removing the other
    // point leaves an uninterpolable query, caught as a singular fold fit.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("degenerate.csv");
    std::fs::write(&path, "#kind=regression,d=1\nx1,y\n0,0\n1,1\n").unwrap();
    let out = run(&[
        "estimate",
        "--data",
        path.to_str().unwrap(),
        "--rule",
        "ols",
        "--contrast",
        "quadratic",
        "--scheme",
        "loo",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn select_prefers_the_matching_bin_width() {
    // 200 points from a two-cell density, menu of three bin widths;
    // the flat histogram should lose.
    let gen = crossval::DataGenerator::piecewise_density(vec![0.0, 0.5, 1.0], vec![1.5, 0.5])
        .unwrap();
    let ds = crossval::generate(&gen, 200, 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("density.csv");
    crossval::save_csv(&ds, &path).unwrap();
    let out = run(&[
        "select",
        "--data",
        path.to_str().unwrap(),
        "--rules",
        "hist:h=1,hist:h=0.5,hist:h=0.25",
        "--contrast",
        "density-ls",
        "--seed",
        "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_ne!(report["result"]["chosen"], "hist:h=1");
    assert_eq!(report["result"]["criterion_values"].as_array().unwrap().len(), 3);

    let vote = run(&[
        "select",
        "--data",
        path.to_str().unwrap(),
        "--rules",
        "hist:h=1,hist:h=0.5,hist:h=0.25",
        "--contrast",
        "density-ls",
        "--seed",
        "5",
        "--vote",
    ]);
    assert!(vote.status.success());
    let vreport: serde_json::Value = serde_json::from_str(&stdout(&vote)).unwrap();
    assert_eq!(
        vreport["result"]["per_split_winners"].as_array().unwrap().len(),
        5
    );
}

#[test]
fn experiment_smoke_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "experiment",
        "--config",
        config_path("smoke.cfg").to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("report.json").exists());
    assert!(out_dir.join("cells.csv").exists());
    assert!(out_dir.join("increments.csv").exists());
}

#[test]
fn experiment_reports_are_jobs_independent() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("jobs1");
    let out8 = dir.path().join("jobs8");
    let config = config_path("smoke.cfg");
    let run1 = run(&[
        "experiment", "--config", config.to_str().unwrap(), "--out-dir",
        out1.to_str().unwrap(), "--jobs", "1",
    ]);
    let run8 = run(&[
        "experiment", "--config", config.to_str().unwrap(), "--out-dir",
        out8.to_str().unwrap(), "--jobs", "8",
    ]);
    assert!(run1.status.success() && run8.status.success());
    for name in ["report.json", "cells.csv", "increments.csv"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out8.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between --jobs 1 and --jobs 8");
    }
}

#[test]
fn experiment_affine_check_passes_with_r_squared_line() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "experiment",
        "--config",
        config_path("affine_in_inv_v.cfg").to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    assert!(text.contains("PASS affine_in_inv_v"), "stdout: {text}");
    assert!(text.contains("R^2"), "stdout: {text}");
}

#[test]
fn experiment_failed_check_exits_4() {
    // The increments check requires the increment to fluctuate less than
    // either criterion; against the flat histogram, whose criterion is the
    // constant -1 with zero variance, it must fail.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("failing.cfg");
    std::fs::write(
        &cfg,
        "generator   = density:breaks=0,0.5,1;dens=1.5,0.5\n\
         n           = 20\n\
         rules       = hist:h=1 hist:h=0.25\n\
         contrast    = density-ls\n\
         schemes     = vfold:v=2\n\
         replicates  = 200\n\
         master_seed = 3\n\
         checks      = increments\n",
    )
    .unwrap();
    let out = run(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("FAIL increments"), "stdout: {}", stdout(&out));
}

#[test]
fn experiment_invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "generator = density:breaks=0,1;dens=1\n").unwrap();
    let out = run(&[
        "experiment",
        "--config",
        bad.to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constants_values_and_bounds() {
    let out = run(&["constants", "--kind", "vf", "--v", "2", "--n", "4"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("C2 = 2.25"));

    let out = run(&[
        "constants", "--kind", "mc", "--v", "1", "--n", "1000000", "--ne", "500000",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let c1: f64 = text
        .lines()
        .find(|l| l.starts_with("C1"))
        .and_then(|l| l.split('=').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((c1 - 12.0).abs() / 12.0 < 0.01, "C1 = {c1}");

    let out = run(&["constants", "--kind", "vf", "--v", "1", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));

    let table = run(&["constants", "--kind", "vf", "--v", "5", "--n", "100", "--table"]);
    assert!(stdout(&table).lines().count() > 4);
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
