use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_transseries");

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|d| d.as_f64().unwrap()).collect()
}

/// Decoupled linear system with an inhomogeneity: `F = 0`.
const LINEAR: &str = "[system]
gamma = 1
n = 2
[A]
0 0 0 1 0
1 1 0 -2 0
0 1 1 0.5 0
[F0]
0 1 1 0
1 2 0.3 0
";

#[test]
fn painleve2_reports_six_singular_directions() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["painleve2", "--a", "1", "--analyze-only"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = json(&dir.path().join("analysis.json"));
    let dirs = floats(&a["singular_directions"]);
    assert_eq!(dirs.len(), 6);
    for (l, d) in dirs.iter().enumerate() {
        assert!((d - std::f64::consts::PI * l as f64 / 3.0).abs() < 1e-12, "{dirs:?}");
    }
    assert_eq!(floats(&a["antipodal"]["directions"]).len(), 6);
    assert_eq!(a["gamma"], 3);
}

#[test]
fn scalar_system_has_one_theta0_direction() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["analyze", "--system", "[system]\ngamma = 1\nn = 1\n[A]\n0 0 0 1 0\n"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = json(&dir.path().join("analysis.json"));
    assert_eq!(floats(&a["theta0"]), vec![0.0]);
    assert!(floats(&a["theta1"]).is_empty());
}

#[test]
fn degenerate_eigenvalues_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let sys = "[system]\ngamma = 1\nn = 2\n[A]\n0 0 0 1 0\n1 1 0 1 0\n";
    let out = run(&["analyze", "--system", sys], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not separated"), "{err}");
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["analyze", "--system", "[system]\ngamma = 1\nn = x\n"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn painleve2_formal_series_contains_the_fourth_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["painleve2", "--a", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("formal_y.csv")).unwrap();
    let row = text.lines().find(|l| l.starts_with("8,")).expect("x^8 row");
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[1].parse::<f64>().unwrap(), 4.0);
    assert!((cols[2].parse::<f64>().unwrap() - 12.0).abs() < 1e-12, "{row}");
    let k = std::fs::read_to_string(dir.path().join("k_series.csv")).unwrap();
    assert!(k.lines().any(|l| l.starts_with("0,8,12")), "{k}");
    let samples = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    for line in samples.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[10], "ok");
        assert!(cols[9].parse::<f64>().unwrap() < 1e-6, "{line}");
    }
}

#[test]
fn zero_nonlinearity_gives_empty_table_and_small_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--system", LINEAR], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("c_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 1, "{table}");
    let samples = std::fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    let mut rows = 0;
    for line in samples.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[6], "ok");
        assert!(cols[5].parse::<f64>().unwrap() <= 1e-9, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 20);
}

#[test]
fn sweep_decreases_with_truncation_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["painleve2", "--a", "1", "--c", "0.005", "--arg", "0.4", "--sweep"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let tr: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(tr.len(), 4);
    assert!(tr.windows(2).all(|w| w[1] < w[0]), "{tr:?}");
}

#[test]
fn verify_passes_for_several_seeds() {
    for seed in 0..5 {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&["verify", "--seed", &seed.to_string()], dir.path());
        assert!(out.status.success(), "seed {seed}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(json(&dir.path().join("verify.json"))["passed"], true);
    }
}

#[test]
fn corrupted_gauge_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--corrupt"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report = json(&dir.path().join("verify.json"));
    for suite in report["suites"].as_array().unwrap() {
        let expect = suite["name"] != "gauge_residual";
        assert_eq!(suite["passed"], expect, "{suite}");
    }
}

#[test]
fn identical_runs_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&["painleve2", "--a", "0.5,0.2", "--sweep", "--seed", "7"], d.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let manifest = json(&a.path().join("manifest.json"));
    let files = manifest["files"].as_array().unwrap();
    assert!(files.len() >= 8);
    for f in files {
        let name = f.as_str().unwrap();
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    assert_eq!(manifest["config"]["seed"], 7);
    assert_eq!(manifest["solve_options"]["n_x"], 30);
}

#[test]
fn manifest_reconstructs_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--system", LINEAR, "--nx", "24", "--tol-quad", "1e-11"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["source"]["text"]["text"], LINEAR);
    assert_eq!(m["config"]["n_x"], 24);
    assert_eq!(m["solve_options"]["summation"]["quad_tol"], 1e-11);
    assert!(m["theta_star"].is_number());
    assert!(m["r_eps"].is_number());
}

#[test]
fn painleve4_runs_on_both_branches() {
    for branch in ["P4.1b", "P4.2"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&["painleve4", "--alpha", "0.3", "--beta", "0.5", "--branch", branch], dir.path());
        assert!(out.status.success(), "{branch}: {}", String::from_utf8_lossy(&out.stderr));
        let a = json(&dir.path().join("analysis.json"));
        assert_eq!(a["antipodal"]["passed"], true);
        assert_eq!(floats(&a["antipodal"]["directions"]).len(), 4);
    }
}

#[test]
fn invalid_options_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["painleve2", "--tol-quad", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["painleve2", "--branch", "P3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
