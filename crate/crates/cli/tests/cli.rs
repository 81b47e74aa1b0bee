use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cpr(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpr"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn matrix_measure_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = cpr(&["gen-matrix", "--m", "8", "--n", "3", "--seed", "7", "--out", "a.txt"], d);
    assert!(out.status.success());
    fs::write(d.join("x.txt"), "0, -2.5, 0\n").unwrap();
    let out = cpr(&["measure", "--matrix", "a.txt", "--signal", "x.txt", "--out", "obs.json"], d);
    assert!(out.status.success());
    for method in ["noiseless", "noisy", "sigma-k"] {
        let out = cpr(&["decode", "--matrix", "a.txt", "--obs", "obs.json", "--method", method, "--k", "1"], d);
        assert_eq!(out.status.code(), Some(0), "{method}");
        let v = json_of(&out);
        let x: Vec<f64> = serde_json::from_value(v["x_hat"].clone()).unwrap();
        let err = (x[0].abs() + (x[1].abs() - 2.5).abs() + x[2].abs()).abs();
        assert!(err < 1e-6, "{method}: {x:?}");
    }
    let out = cpr(&["decode", "--matrix", "a.txt", "--obs", "obs.json", "--method", "alternating", "--seed", "3"], d);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["exact"], Value::Bool(false));
}

#[test]
fn certify_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("dup.txt"), "4 2\n1 0\n0 1\n1 0\n0 1\n").unwrap();
    let out = cpr(&["certify", "--matrix", "dup.txt", "--property", "srip", "--k", "1"], d);
    assert!(out.status.success());
    let v = json_of(&out);
    assert!(v["theta_minus"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["valid"], Value::Bool(false));

    fs::write(d.join("ones.txt"), "1 2\n1 1\n").unwrap();
    let out = cpr(&["certify", "--matrix", "ones.txt", "--property", "nsp", "--k", "1"], d);
    let v = json_of(&out);
    assert!((v["constant"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn bounds_reports_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = cpr(&["bounds", "--formula", "mixed-nsp", "--params", r#"{"delta": 0, "p": 1, "q": 1}"#], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert!((v["value"].as_f64().unwrap() - (2f64.powf(1.5) + 1.0)).abs() < 1e-12);

    let out = cpr(&["bounds", "--formula", "l1-io", "--params", r#"{"theta_minus": 1, "theta_plus": 1, "t": 2}"#], dir.path());
    let v = json_of(&out);
    assert_eq!(v["value"]["c"]["kind"], "boundary-degenerate");

    let out = cpr(&["bounds", "--formula", "stability", "--params", r#"{"delta": 0.95, "t": 2}"#], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["ok"], Value::Bool(false));
}

#[test]
fn experiment_and_verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("harmonic.json"), r#"{"N": 2, "m": 8, "k": 1, "trials": 4, "matrix_model": "harmonic"}"#).unwrap();
    let out = cpr(&["verify", "all", "--config", "harmonic.json"], d);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["status"], "pass");

    fs::write(
        d.join("scaled.json"),
        r#"{"N": 2, "m": 8, "k": 1, "trials": 2, "matrix_model": "harmonic", "matrix_scale": 10}"#,
    )
    .unwrap();
    let out = cpr(&["verify", "stability", "--config", "scaled.json"], d);
    assert_eq!(out.status.code(), Some(2));

    let out = cpr(&["experiment", "--config", "harmonic.json", "--out", "run"], d);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(d.join("run/trials.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("trial,seed,"));
    assert!(d.join("run/summary.json").exists());

    fs::write(d.join("bad.json"), r#"{"N": 2, "m": 8, "k": 5, "trials": 1}"#).unwrap();
    assert_eq!(cpr(&["experiment", "--config", "bad.json"], d).status.code(), Some(3));
    assert_eq!(cpr(&["decode", "--matrix", "missing.txt", "--obs", "x", "--method", "noisy"], d).status.code(), Some(3));
}
