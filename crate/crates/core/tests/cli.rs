use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_patchbif");

const THREE_LAYER: &str = r#"{
  "schema_version": 1,
  "problem": {"family": "three_layer", "b2": 0.5, "theta2": -5.0},
  "fold": 2,
  "solver": {"truncation": 8, "quadrature": 128, "max_steps": 3, "ds": 0.005},
  "grid": {"x_min": -1.2, "x_max": 1.2, "nx": 7, "y_min": -1.2, "y_max": 1.2, "ny": 7}
}"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn error_field(out: &Output) -> String {
    let line = String::from_utf8_lossy(&out.stderr);
    let v: Value = serde_json::from_str(line.trim()).expect("stderr is one JSON line");
    v["error"].as_str().unwrap().to_string()
}

fn pipeline(dir: &Path) {
    fs::write(dir.join("c.json"), THREE_LAYER).unwrap();
    for args in [
        &["bifurcate", "--config", "c.json", "--out", "o"][..],
        &["continue", "--config", "c.json", "--out", "o"][..],
    ] {
        let out = run(dir, args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn full_workflow_and_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let out = run(dir, &["verify", "--record", "o/branch.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["states"].as_array().unwrap().len(), 3);

    let cert = fs::read_to_string(dir.join("o/certificate.json")).unwrap();
    assert!(cert.contains("\"config_hash\""));
    let csv = fs::read_to_string(dir.join("o/branch.csv")).unwrap();
    assert!(csv.starts_with("# patchbif "));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path());
    pipeline(b.path());
    for f in ["certificate.json", "branch.json", "branch.csv"] {
        let x = fs::read(a.path().join("o").join(f)).unwrap();
        let y = fs::read(b.path().join("o").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn corrupted_coefficient_fails_verification() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let path = dir.join("o/branch.json");
    let mut record: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let c = &mut record["states"][1]["perturbations"][0]["coeffs"][0];
    *c = Value::from(c.as_f64().unwrap() + 1e-4);
    fs::write(&path, serde_json::to_string(&record).unwrap()).unwrap();

    let out = run(dir, &["verify", "--record", "o/branch.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("o/report.json")).unwrap()).unwrap();
    assert_eq!(report["states"][0]["report"]["pass"], true);
    let metrics = report["states"][1]["report"]["metrics"].as_array().unwrap();
    let failing: Vec<&str> = metrics
        .iter()
        .filter(|m| m["pass"] == false)
        .map(|m| m["name"].as_str().unwrap())
        .collect();
    assert!(failing.contains(&"residual"), "{failing:?}");
}

#[test]
fn stricter_reverification_keeps_residuals_small() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let out = run(dir, &["verify", "--record", "o/branch.json", "--strict", "4", "--out", "s4"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("s4/report.json")).unwrap()).unwrap();
    assert_eq!(report["strict"], 4);
    for st in report["states"].as_array().unwrap() {
        let m = st["report"]["metrics"].as_array().unwrap();
        let r = m.iter().find(|x| x["name"] == "residual").unwrap();
        assert!(r["value"].as_f64().unwrap() < 10.0 * r["tolerance"].as_f64().unwrap());
    }
}

#[test]
fn sample_is_m_fold_symmetric() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    // Symmetric grid about the origin: rotation by π maps it onto itself.
    let out = run(
        dir,
        &["sample", "--record", "o/branch.json", "--state", "2", "--grid=-1.3,1.3,9,-1.3,1.3,9", "--out", "o"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.join("o/fields.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| l.starts_with("grid,"))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 81);
    let val = |r: &[&str], i: usize| r[i].parse::<f64>().unwrap();
    for (k, r) in rows.iter().enumerate() {
        let q = &rows[80 - k];
        if r[8] != "ok" || q[8] != "ok" {
            continue;
        }
        // Rotation by π flips the velocity vector and preserves ψ.
        assert!((val(r, 4) + val(q, 4)).abs() < 1e-10);
        assert!((val(r, 5) + val(q, 5)).abs() < 1e-10);
        assert!((val(r, 7) - val(q, 7)).abs() < 1e-10);
    }
    assert!(text.lines().any(|l| l.starts_with("boundary,2,")));
}

#[test]
fn spectrum_lists_requested_modes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("c.json"), THREE_LAYER).unwrap();
    let out = run(dir, &["spectrum", "--config", "c.json", "--n-max", "6", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.join("o/spectrum.csv")).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 7);
    assert_eq!(data[0].split(',').count(), 4 + 9);
    let det1: f64 = data[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!(det1.abs() < 1e-10);
}

#[test]
fn window_violation_exits_2_with_typed_error() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("c.json"),
        r#"{"schema_version":1,"problem":{"family":"two_layer","b":0.5},"fold":2}"#,
    )
    .unwrap();
    let out = run(dir, &["bifurcate", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_field(&out), "B_TOO_LARGE");
    assert!(!dir.join("certificate.json").exists());
}

#[test]
fn zero_mean_request_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("c.json"),
        r#"{"schema_version":1,"problem":{"family":"two_layer","b":0.3},"fold":2,"theta":0.09}"#,
    )
    .unwrap();
    let out = run(dir, &["bifurcate", "--config", "c.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_field(&out), "ZERO_MEAN_NO_BIFURCATION");
}

#[test]
fn io_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["verify", "--record", "missing.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_field(&out), "IO");
}

#[test]
fn certificate_for_another_problem_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    // n_max is part of the certified problem.
    let out = run(dir, &["continue", "--config", "c.json", "--n-max", "30", "--certificate", "o/certificate.json", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_field(&out), "CONFIG");
}

#[test]
fn flags_override_config_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let out = run(dir, &["continue", "--config", "c.json", "--mode", "nash-moser", "--out", "o2", "--certificate", "o/certificate.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: Value = serde_json::from_str(&fs::read_to_string(dir.join("o2/branch.json")).unwrap()).unwrap();
    assert_eq!(rec["config"]["solver"]["mode"], "nash_moser");
    let a = rec["states"][2]["amplitude"].as_f64().unwrap();
    assert!((a - 0.015).abs() < 1e-12, "{a}");
}
