use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bellsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = bellsim(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bellsim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn chsh_analytic_and_empirical() {
    let v = json(&["chsh", "--model", "qm", "--angles", "0,45,22.5,-22.5"]);
    assert!((v["analytic"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    let v = json(&["chsh", "--model", "lhv", "--trials", "2000", "--seed", "4"]);
    assert!(v["empirical"].is_number());
    assert_eq!(v["seed"], 4);
}

#[test]
fn lhv_bound() {
    let v = json(&["lhv-bound", "--angles", "10,20,30,40"]);
    assert_eq!(v["max"], 2.0);
    assert_eq!(v["min"], -2.0);
}

#[test]
fn nosignal_reports() {
    let v = json(&["nosignal", "--model", "qm", "--grid", "12"]);
    assert_eq!(v["holds"], true);
    let v = json(&["nosignal", "--model", "fixture:0.2", "--grid", "0,90"]);
    assert_eq!(v["holds"], false);
    assert!((v["max_deviation"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn scenario_chances_and_dependence() {
    let path = scratch("overlap.json");
    let out = bellsim(&[
        "scenario",
        "--layout",
        "overlap",
        "--a",
        "0",
        "--b",
        "60",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = path.to_str().unwrap();
    assert_eq!(
        json(&["chances", "--scenario", s, "--point", "p", "--target", "eA"])["chance"],
        0.5
    );
    let q = json(&["chances", "--scenario", s, "--point", "q", "--target", "eA"]);
    assert!((q["chance"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let none = json(&[
        "chances",
        "--scenario",
        s,
        "--point",
        "-1,0",
        "--target",
        "eA",
    ]);
    assert!(none["chance"].is_null());
    let d = json(&[
        "depends",
        "--scenario",
        s,
        "--effect",
        "eA",
        "--cause",
        "outcome-b",
    ]);
    assert_eq!(d["verdict"]["verdict"], "senseless_intervention");
}

#[test]
fn simulate_writes_outputs() {
    let log = scratch("trials.jsonl");
    let report = scratch("report.csv");
    let config = scratch("config.json");
    let text = serde_json::json!({
        "model": {"kind": "qm"},
        "schedule": {"pairs": [[0.0, 0.0], [0.0, 22.5]]},
        "trials_per_pair": 50,
        "seed": 1,
        "output": {"trial_log": log, "report": report, "format": "csv"}
    });
    std::fs::write(&config, text.to_string()).unwrap();
    let out = bellsim(&["simulate", "--config", config.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 100);
    let csv = std::fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("pair_index,a_deg,b_deg,n,f_VV,f_VH,f_HV,f_HH,E,E_stderr\n"));
}

#[test]
fn bad_input_fails_cleanly() {
    let out = bellsim(&["chsh", "--model", "bohm"]);
    assert_eq!(out.status.code(), Some(2));
    let config = scratch("zero.json");
    std::fs::write(
        &config,
        r#"{"model":{"kind":"qm"},"schedule":{"pairs":[[0,0]]},"trials_per_pair":0}"#,
    )
    .unwrap();
    let out = bellsim(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials_per_pair"));
}
