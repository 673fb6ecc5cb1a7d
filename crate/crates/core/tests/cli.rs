use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bmjet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmjet")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_is_deterministic_and_passes_by_default() {
    let a = bmjet(&["verify", "--samples", "30"]);
    let b = bmjet(&["verify", "--samples", "30"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["meta"]["seed"], 42);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["pass"] == true && c["anchor"].is_string()));
    let other = bmjet(&["verify", "--samples", "30", "--seed", "7"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn corrupted_tolerance_fails_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"verify": {"samples": 5, "tolerances": {"oracle-metric": 1e-30}}}"#);
    let out = bmjet(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<_> = report["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["name"], "oracle-metric");
    assert_eq!(failed[0]["tol"], 1e-30);
}

#[test]
fn malformed_sigma_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"geometry": {"sigma": "x1*"}}"#);
    let out = bmjet(&["eval", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "syntax");
    assert_eq!(err["error"]["which"], "sigma");
    assert_eq!(err["error"]["offset"], 3);
}

#[test]
fn eval_writes_report_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"geometry": {"n": 3, "sigma": "0", "h11": "1"}, "points": [{"t": 0, "x": [0, 0, 0], "y": [1, 1, 1]}]}"#,
    );
    let out_path = dir.path().join("report.json");
    let out = bmjet(&["eval", "--config", &cfg, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let point = &report["points"][0];
    assert!((point["Sc"].as_f64().unwrap() + 2.0).abs() < 1e-12);
    assert_eq!(point["g"].as_array().unwrap().len(), 3);
    assert_eq!(point["curvature"]["R"][0][0][0].as_array().unwrap().len(), 3);
    assert!(point["em"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).all(|v| v == 0.0));
}

#[test]
fn geodesic_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.json",
        r#"{"geometry": {"sigma": "0", "h11": "1"},
            "geodesic": {"t0": 0, "t1": 1, "steps": 100, "x0": [0, 0, 0], "y0": [1, 2, 4]}}"#,
    );
    let out = bmjet(&["geodesic", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let traj = report["trajectory"].as_array().unwrap();
    assert_eq!(traj.len(), 101);
    assert!(report["geodesic"]["el_residual"].as_f64().unwrap() <= 1e-10);

    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{"geodesic": {"t0": 0, "t1": 1, "steps": 0, "x0": [0, 0, 0], "y0": [1, 1, 1]}}"#,
    );
    assert_eq!(bmjet(&["geodesic", "--config", &bad]).status.code(), Some(2));
    assert_eq!(bmjet(&["geodesic"]).status.code(), Some(2));

    let exit = write_config(
        dir.path(),
        "exit.json",
        r#"{"geometry": {"sigma": "x1", "h11": "1"},
            "geodesic": {"t0": 0, "t1": 1, "steps": 1, "x0": [0, 0, 0], "y0": [1, 1, 1]}}"#,
    );
    let out = bmjet(&["geodesic", "--config", &exit]);
    assert_eq!(out.status.code(), Some(2));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["errors"][0]["kind"], "domain-exit");
    assert_eq!(report["geodesic"]["completed"], false);
    assert_eq!(report["trajectory"].as_array().unwrap().len(), 1);
}

#[test]
fn unknown_tolerance_name_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"verify": {"tolerances": {"nope": 1}}}"#);
    let out = bmjet(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "unknown-check");
}
