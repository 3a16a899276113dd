use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperising")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn kv(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("missing {key} in:\n{text}"))
}

fn small_model(dir: &Path) {
    fs::write(dir.join("g.txt"), "hypergraph n=4 m=3\n0.5 0 1 2\n0.5 1 3\n-0.5 0 3\n").unwrap();
    fs::write(dir.join("x.csv"), "x0\n0.5\n-0.3\n0.8\n-0.6\n").unwrap();
}

#[test]
fn pipeline_generate_sample_estimate_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(&["generate", "-n", "400", "-d", "2", "-m", "3", "--seed", "3", "--out", p(d)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (g, x, truth, y) = (d.join("graph.txt"), d.join("covariates.csv"), d.join("truth.txt"), d.join("y.txt"));

    let out = run(&["sample", "--graph", p(&g), "--covariates", p(&x), "--params", p(&truth), "--seed", "5", "--out", p(&y)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(&y).unwrap().lines().count(), 1);

    let trace = d.join("trace.csv");
    let out = run(&[
        "estimate", "--graph", p(&g), "--covariates", p(&x), "--sample", p(&y), "--B", "1", "--Theta", "1", "--trace", p(&trace),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    let iterations: usize = kv(&report, "iterations").parse().unwrap();
    assert!(kv(&report, "stop_reason") != "max_iterations");
    let rows = fs::read_to_string(&trace).unwrap();
    assert_eq!(rows.lines().next().unwrap(), "iteration,lpl,grad_norm");
    assert_eq!(rows.lines().count(), iterations + 2);

    let out = run(&["diagnose", "--graph", p(&g), "--covariates", p(&x), "--B", "1", "--Theta", "1", "--params", p(&truth), "--full"]);
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(kv(&report, "hard_assumptions_ok"), "true");
    assert_eq!(kv(&report, "selection_is_bijection"), "true");
    let keys: Vec<&str> = report.lines().map(|l| l.split(" = ").next().unwrap()).collect();
    let mut unique = keys.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(keys.len(), unique.len());
}

#[test]
fn estimate_exit_code_reflects_iteration_cap() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_model(d);
    fs::write(d.join("y.txt"), "1 0 1 1\n").unwrap();
    let (g, x) = (d.join("g.txt"), d.join("x.csv"));
    let base = ["estimate", "--graph", p(&g), "--covariates", p(&x), "--sample"];
    let sample = d.join("y.txt");
    let mut args: Vec<&str> = base.to_vec();
    args.extend([p(&sample), "--zero-one", "--B", "0.3", "--Theta", "1", "--max-iters", "1", "--tol", "1e-12"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(kv(&String::from_utf8(out.stdout).unwrap(), "stop_reason"), "max_iterations");

    let mut args: Vec<&str> = base.to_vec();
    args.extend([p(&sample), "--zero-one", "--B", "0.3", "--Theta", "1"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn diagnose_fails_on_degree_violation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("g.txt"), "hypergraph n=4 m=2\n1 0 1\n1 0 2\n").unwrap();
    fs::write(d.join("x.csv"), "0.5\n-0.3\n0.8\n-0.6\n").unwrap();
    let out = run(&["diagnose", "--graph", p(&d.join("g.txt")), "--covariates", p(&d.join("x.csv")), "--B", "1", "--Theta", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(kv(&report, "degree_ok"), "false");
    assert_eq!(kv(&report, "max_degree"), "2");
}

#[test]
fn sample_is_reproducible_and_exact_mode_works() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_model(d);
    let (g, x) = (d.join("g.txt"), d.join("x.csv"));
    let args = ["sample", "--graph", p(&g), "--covariates", p(&x), "--theta", "0.4", "--beta", "-0.25", "--chains", "7", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 7);

    let mut exact = args.to_vec();
    exact.push("--exact");
    let out = run(&exact);
    assert!(out.status.success());
    for line in String::from_utf8(out.stdout).unwrap().lines() {
        assert_eq!(line.split_whitespace().count(), 4);
        assert!(line.split_whitespace().all(|s| s == "1" || s == "-1"));
    }
}

#[test]
fn input_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_model(d);
    fs::write(d.join("y.txt"), "1 -1 1\n").unwrap();
    let out = run(&[
        "estimate", "--graph", p(&d.join("g.txt")), "--covariates", p(&d.join("x.csv")), "--sample", p(&d.join("y.txt")), "--B", "1", "--Theta", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spins"));
    let out = run(&["sample", "--graph", p(&d.join("g.txt")), "--covariates", p(&d.join("x.csv"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_writes_outputs_and_reports_slope() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let spec = r#"
family = "group_blocks"
n_values = [100, 200, 400]
d = 2
m = 3
trials_per_n = 4
master_seed = 7
slope_range = [-2.0, 0.0]

[truth_box]
big_b = 1.0
big_theta = 1.0
big_m = 1.4142135623730951

[truth_draw]
kind = "uniform_in_box"

[sampler]
kind = "glauber"
seed = 0
burn_in_sweeps = 100
"#;
    fs::write(d.join("spec.toml"), spec).unwrap();
    let out_dir = d.join("out");
    let out = run(&["experiment", "--spec", p(&d.join("spec.toml")), "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(out_dir.join("rows.csv")).unwrap().lines().count(), 13);
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert_eq!(kv(&summary, "slope_ok"), "true");
    let trial = fs::read_to_string(out_dir.join("trials/n200_t3.txt")).unwrap();
    assert_eq!(kv(&trial, "n"), "200");

    fs::write(d.join("narrow.toml"), spec.replace("[-2.0, 0.0]", "[5.0, 6.0]")).unwrap();
    let out = run(&["experiment", "--spec", p(&d.join("narrow.toml")), "--out", p(&d.join("out2"))]);
    assert_eq!(out.status.code(), Some(1));
}
