use std::path::Path;
use std::process::{Command, Output};

use mpmc::generators::fibonacci_set;
use mpmc::gnn::{build_radius_graph, forward, init_model, Checkpoint};
use mpmc::points::{read_points, to_csv};
use mpmc::PointSet64;
use serde_json::Value;

fn mpmc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpmc")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(args: &[&str], cwd: &Path) -> String {
    let out = mpmc(args, cwd);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str], cwd: &Path) -> i32 {
    mpmc(args, cwd).status.code().unwrap()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn csv_row<'a>(csv: &'a str, method: &str, n: usize) -> Vec<&'a str> {
    csv.lines()
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| f[0] == method && f[2] == n.to_string())
        .unwrap()
}

#[test]
fn generate_fibonacci_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&["generate", "--kind", "fibonacci", "--n", "5"], dir.path());
    assert_eq!(out, to_csv(&fibonacci_set::<f64>(5).unwrap()));
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn generate_sobol_rows_and_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&["generate", "--kind", "sobol", "--n", "64", "--d", "2"], dir.path());
    assert_eq!(out.lines().count(), 64);
    std::fs::write(dir.path().join("spec.json"), r#"{"kind": "sobol", "n": 64, "d": 2}"#).unwrap();
    assert_eq!(stdout(&["generate", "--spec", "@spec.json"], dir.path()), out);
}

#[test]
fn generate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["generate", "--spec", "{\"kind\": "], dir.path()), 2);
    assert_eq!(code(&["generate", "--spec", r#"{"kind": "sobol", "n": 4, "colour": 1}"#], dir.path()), 2);
    assert_eq!(code(&["generate", "--kind", "sobol", "--n", "4"], dir.path()), 2);
    assert_eq!(code(&["generate", "--kind", "nonsense", "--n", "4"], dir.path()), 2);
    assert_eq!(code(&["generate", "--kind", "halton", "--n", "4", "--base", "2,1"], dir.path()), 2);
    assert_eq!(code(&["generate", "--kind", "halton", "--n", "4", "--base", "3,3"], dir.path()), 2);
}

#[test]
fn discrepancy_reports() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("fib.csv"), to_csv(&fibonacci_set::<f64>(20).unwrap())).unwrap();
    let star = json(&stdout(&["discrepancy", "fib.csv", "--measure", "star"], p));
    assert_eq!(star["measure"], "star");
    assert!((star["value"].as_f64().unwrap() - 0.11885).abs() < 1e-4);
    assert_eq!(star["witness"].as_array().unwrap().len(), 2);

    std::fs::write(p.join("one.csv"), "0.5\n").unwrap();
    let sq = json(&stdout(&["discrepancy", "one.csv", "--measure", "l2-squared"], p));
    assert!((sq["value"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-15);
    let l2 = json(&stdout(&["discrepancy", "one.csv", "--measure", "l2"], p));
    assert!((l2["value"].as_f64().unwrap() - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);

    let lb = json(&stdout(&["discrepancy", "fib.csv", "--measure", "star-lower-bound", "--samples", "500"], p));
    assert_eq!(lb["exact"], false);
    assert!(lb["value"].as_f64().unwrap() <= star["value"].as_f64().unwrap());
}

#[test]
fn discrepancy_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    stdout(&["generate", "--kind", "sobol", "--n", "8", "--d", "25", "--out", "s25.csv"], p);
    assert_eq!(code(&["discrepancy", "s25.csv", "--measure", "hickernell"], p), 3);
    let spec = r#"{"mode": "random", "k_samples": 4, "seed": 1}"#;
    let h = json(&stdout(&["discrepancy", "s25.csv", "--measure", "hickernell", "--spec", spec], p));
    assert_eq!(h["measure"], "hickernell_random");
    assert_eq!(h["subsets"].as_array().unwrap().len(), 4);
    assert_eq!(code(&["discrepancy", "s25.csv", "--measure", "star", "--budget", "1000"], p), 3);
    assert_eq!(code(&["discrepancy", "missing.csv"], p), 2);
    std::fs::write(p.join("bad.csv"), "0.5,1.5\n").unwrap();
    assert_eq!(code(&["discrepancy", "bad.csv"], p), 2);
}

#[test]
fn zero_learning_rate_keeps_initial_model() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let config = r#"{"n_points": 12, "dim": 2, "learning_rate": 0.0, "max_steps": 150, "max_initial_steps": 150, "seed": 4}"#;
    std::fs::write(p.join("c.json"), config).unwrap();
    stdout(&["--out", "run", "train", "c.json"], p);
    for f in ["checkpoint.json", "points.csv", "history.csv", "result.json", "manifest.json"] {
        assert!(p.join("run").join(f).is_file(), "{f}");
    }
    let result = json(&std::fs::read_to_string(p.join("run/result.json")).unwrap());
    let ck = Checkpoint::load(p.join("run/checkpoint.json")).unwrap();
    let init = init_model(2, ck.hidden, ck.layers, result["model_seed"].as_u64().unwrap()).unwrap();
    assert_eq!(ck.model, init);
    let inputs = ck.input_points().unwrap().unwrap();
    let expected = forward(&init, &inputs, &build_radius_graph(&inputs, ck.radius).unwrap()).unwrap();
    let written: PointSet64 = read_points(p.join("run/points.csv")).unwrap();
    assert_eq!(written, expected);
    assert_eq!(stdout(&["generate", "--checkpoint", "run/checkpoint.json"], p), to_csv(&expected));
    let history = std::fs::read_to_string(p.join("run/history.csv")).unwrap();
    assert!(history.starts_with("step,objective\n"));
}

#[test]
fn train_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("b7.json"), r#"{"n_points": 12, "dim": 2, "batch_size": 7}"#).unwrap();
    assert_eq!(code(&["train", "b7.json"], p), 2);
    std::fs::write(p.join("r.json"), r#"{"n_points": 12, "dim": 2, "radius": 3.0}"#).unwrap();
    assert_eq!(code(&["train", "r.json"], p), 2);
    std::fs::write(p.join("m.json"), "[1, 2").unwrap();
    assert_eq!(code(&["train", "m.json"], p), 2);
    assert!(!p.join("mpmc-train").exists());
}

#[test]
fn price_with_points_and_sobol() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let est = json(&stdout(&["price", "--sobol", "32"], p));
    assert_eq!(est["N"], 32);
    assert!((est["abs_error"].as_f64().unwrap() - 1.235).abs() < 5e-4);
    stdout(&["generate", "--kind", "sobol", "--n", "32", "--d", "32", "--out", "s.csv"], p);
    assert_eq!(json(&stdout(&["price", "s.csv"], p)), est);
    stdout(&["generate", "--kind", "sobol", "--n", "32", "--d", "4", "--out", "s4.csv"], p);
    assert_eq!(code(&["price", "s4.csv"], p), 2);
    let four = r#"{"s0": 50, "strike": 45, "maturity": 1, "risk_free": 0.05, "sigma": 0.3, "n_times": 4, "reference_value": 7.0}"#;
    let e4 = json(&stdout(&["price", "s4.csv", "--config", four], p));
    assert!(e4["estimate"].as_f64().unwrap() > 0.0);
}

#[test]
fn project_and_localfield() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    stdout(&["generate", "--kind", "halton", "--n", "10", "--d", "3", "--out", "h.csv"], p);
    let proj = stdout(&["project", "h.csv", "--dims", "2,0"], p);
    let first = proj.lines().nth(1).unwrap();
    let full = std::fs::read_to_string(p.join("h.csv")).unwrap();
    let cols: Vec<&str> = full.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first, format!("{},{}", cols[0], cols[2]));
    assert_eq!(code(&["project", "h.csv", "--dims", "3"], p), 2);
    assert_eq!(code(&["localfield", "h.csv"], p), 2);
}

#[test]
fn localfield_grid_shape() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    stdout(&["generate", "--kind", "fibonacci", "--n", "13", "--out", "f.csv"], p);
    let field = stdout(&["localfield", "f.csv", "--resolution", "7"], p);
    assert_eq!(field.lines().count(), 7);
    assert!(field.lines().all(|l| l.split(',').count() == 7));
}

#[test]
fn benchmark_published_cells() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    stdout(&["benchmark", "optimal_2d", "--out", "b"], p);
    let opt = std::fs::read_to_string(p.join("b/optimal_2d.csv")).unwrap();
    assert!(opt.starts_with("method,param,n,measure,value,reference,tolerance,status\n"));
    let fib5 = csv_row(&opt, "fibonacci", 5);
    assert!((fib5[4].parse::<f64>().unwrap() - 0.3528).abs() < 5e-4);
    assert_eq!(fib5[7], "pass");
    assert_eq!(csv_row(&opt, "mpmc", 5)[7], "skipped");
    assert_eq!(csv_row(&opt, "optimal", 5)[7], "reference");
    assert!(p.join("b/optimal_2d.manifest.json").is_file());

    stdout(&["benchmark", "l2_vs_n", "--out", "b"], p);
    let l2 = std::fs::read_to_string(p.join("b/l2_vs_n.csv")).unwrap();
    assert!((csv_row(&l2, "fibonacci", 1020)[4].parse::<f64>().unwrap() - 0.00094).abs() < 1e-5);
    stdout(&["benchmark", "star_vs_n", "--out", "b"], p);
    let star = std::fs::read_to_string(p.join("b/star_vs_n.csv")).unwrap();
    let halton = csv_row(&star, "halton", 20);
    assert!((halton[4].parse::<f64>().unwrap() - 0.17384).abs() < 1e-4);
    assert_eq!(halton[7], "pass");
}

#[test]
fn benchmark_uses_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let args = ["--threads", "1", "benchmark", "optimal_3d", "--train-steps", "60", "--checkpoint-dir", "ck", "--out", "b"];
    stdout(&args, p);
    assert!(p.join("ck/mpmc_d3_n4.json").is_file());
    let trained = std::fs::read_to_string(p.join("b/optimal_3d.csv")).unwrap();
    assert!(csv_row(&trained, "mpmc", 4)[4].parse::<f64>().is_ok());
    stdout(&["benchmark", "optimal_3d", "--checkpoint-dir", "ck", "--out", "c"], p);
    assert_eq!(std::fs::read_to_string(p.join("c/optimal_3d.csv")).unwrap(), trained);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["benchmark", "nope"], dir.path()), 2);
    assert_eq!(code(&["frobnicate"], dir.path()), 2);
    assert_eq!(code(&["--threads", "0", "price", "--sobol", "4"], dir.path()), 2);
    assert_eq!(code(&["--help"], dir.path()), 0);
}
