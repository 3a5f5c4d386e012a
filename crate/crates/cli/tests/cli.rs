use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use derham_cli::{Report, Verdict};

fn derham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_derham"))
        .args(args)
        .env_remove("DERHAM_DELTA")
        .env_remove("DERHAM_N")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn suite(dir: &Path, config: &str, format: &str) -> Output {
    let cfg = dir.join("suite.cfg");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_derham"))
        .args(["run-suite", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", format])
        .output()
        .unwrap()
}

#[test]
fn classify_reports_windows() {
    let o = derham(&["classify", "--n", "3", "--delta", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "BoundaryExcluded");
    let o = derham(&["classify", "--n", "4", "--delta", "4.5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["class"].as_str(), v["m"].as_u64()), (Some("Injection"), Some(1)));
    let o = Command::new(env!("CARGO_BIN_EXE_derham")).args(["classify", "--n", "3"]).env("DERHAM_DELTA", "1.5").output().unwrap();
    assert!(stdout(&o).contains("Isomorphism"));
}

#[test]
fn expansion_csv_schema() {
    let o = derham(&["kernel-expansion", "--n", "3", "--max-m", "10", "--format", "csv"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("m,remainder,ratio"));
    assert_eq!(lines.count(), 11);
}

#[test]
fn suite_json_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "suite = quick\nn = 2\nchecks = algebra, harmonics, kernels\n";
    let o = suite(dir.path(), cfg, "json");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    let mut a = Report::from_json(&first).unwrap();
    assert!(a.passed() && !a.checks.is_empty());
    assert!(a.checks.iter().all(|c| !c.anchor.is_empty() && c.inputs_digest.len() == 16));
    assert_eq!(Report::from_json(&a.to_json().unwrap()).unwrap(), a);
    suite(dir.path(), cfg, "json");
    let mut b = Report::from_json(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    a.env.generated_unix = 0;
    b.env.generated_unix = 0;
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn boundary_weight_skips_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let o = suite(dir.path(), "n = 3\ndelta = 2\nm = 0\nchecks = spaces, cohomology\n", "csv");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains("spaces.classify[n=3,delta=2]") && l.contains("BoundaryExcluded")));
    assert_eq!(csv.lines().filter(|l| l.contains(",skip,")).count(), 6);
}

#[test]
fn plot_data_series() {
    let dir = tempfile::tempdir().unwrap();
    let o = suite(dir.path(), "n = 2\nq = 0\nchecks = kernels, potentials\n", "plot-data");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let e = fs::read_to_string(dir.path().join("out/expansion_n2.csv")).unwrap();
    assert!(e.starts_with("m,remainder,ratio\n"));
    let d = fs::read_to_string(dir.path().join("out/decay_fit_n2.csv")).unwrap();
    assert!(d.starts_with("log_r,log_abs_phi_f\n"));
    assert_eq!(d.lines().count(), 7);
}

#[test]
fn empty_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = suite(dir.path(), "checks =\n", "json");
    assert!(o.status.success());
    let r = Report::from_json(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert!(r.checks.is_empty());
}

#[test]
fn invalid_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let o = suite(dir.path(), "n = 9\nlambda = 3\ntol = -1\n", "json");
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("n = 9") && err.contains("lambda = 3") && err.contains("τ = -1"), "{err}");
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn failing_check_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    // a quadrature too coarse for the tolerance makes the potential identities fail
    let o = suite(dir.path(), "n = 2\nq = 0\nchecks = potentials\npanels = 1\norder = 2\nangular = 2\ntol = 1e-9\n", "json");
    assert_eq!(o.status.code(), Some(1));
    let r = Report::from_json(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert!(r.checks.iter().any(|c| c.verdict == Verdict::Fail));
}

#[test]
fn basis_and_solvability_outputs() {
    let o = derham(&["cohomology-basis", "--n", "3", "--m", "0", "--aniso", "--time-class", "holder"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["basis"]["rank"], 3);
    assert_eq!(v["forms"].as_array().unwrap().len(), 3);
    assert!(v["time_classes"].as_array().unwrap().iter().all(|r| r["accepted"] == true));

    let dir = tempfile::tempdir().unwrap();
    let form = serde_json::to_string(&v["forms"][0]).unwrap();
    let path = dir.path().join("g.json");
    fs::write(&path, form).unwrap();
    let o = derham(&["solvability", "--n", "3", "--m", "0", "--input", path.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.starts_with("k,j,index,t,value,tail\n"));
    let big = s.lines().skip(1).filter_map(|l| l.split(',').nth(4)?.parse::<f64>().ok()).fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(big > 1e-3);
}
