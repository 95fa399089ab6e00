use std::path::Path;
use std::process::{Command, Output};

fn superposition(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superposition")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gram_reports_determinant() {
    let out = superposition(&["gram", "--constant", "3", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let det = v["determinant"].as_f64().unwrap();
    assert!((det - 0.75f64.powi(2) * 1.5).abs() < 1e-12);
    assert_eq!(v["dimension"], 3);
}

#[test]
fn inadmissible_overlap_is_input_error() {
    let out = superposition(&["gram", "--constant", "2", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_state_file_is_input_error() {
    let out =
        superposition(&["measure", "--state", "/nonexistent/state.json", "--constant", "2", "0.5", "--measure", "l1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixture_then_measure() {
    let dir = tempfile::tempdir().unwrap();
    let out = superposition(&["fixture", "rho-x", "--out", path(dir.path()), "--x", "0.25", "--mu", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let state = dir.path().join("state.json");
    let basis = dir.path().join("basis.json");

    let out = superposition(&["measure", "--state", path(&state), "--basis", path(&basis), "--measure", "l1"]);
    assert_eq!(out.status.code(), Some(0));
    let l1 = json(&out)["value"].as_f64().unwrap();
    assert!((l1 - 0.5 / 1.25).abs() < 1e-9, "{l1}");

    let out = superposition(&[
        "measure",
        "--state",
        path(&state),
        "--basis",
        path(&basis),
        "--measure",
        "l1_roof",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let roof = json(&out)["value"].as_f64().unwrap();
    assert!((roof - 0.4).abs() < 1e-3, "{roof}");
}

#[test]
fn free_fixture_measures_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = superposition(&["fixture", "free", "--out", path(dir.path()), "--d", "3", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let state = dir.path().join("state.json");
    let basis = dir.path().join("basis.json");
    for m in ["l1", "robustness", "weight"] {
        let out = superposition(&["measure", "--state", path(&state), "--basis", path(&basis), "--measure", m]);
        assert_eq!(out.status.code(), Some(0), "{m}");
        assert!(json(&out)["value"].as_f64().unwrap().abs() < 1e-6, "{m}");
    }
}

#[test]
fn channel_fixture_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = superposition(&["fixture", "channel", "--out", path(dir.path()), "--family", "cyclic"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("channel.json").is_file());
    let out = superposition(&["fixture", "channel", "--out", path(dir.path()), "--family", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn example1_csv() {
    let out = superposition(&["example1", "--mu", "-0.25,0.5", "--x-steps", "3", "--restarts", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mu,x,closed_form,roof_value,gamma_value,gap"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r[5] < 1e-3, "{r:?}");
    }
}

#[test]
fn axioms_table_and_broken_control() {
    let out = superposition(&["axioms", "--measure", "l1", "--d", "3", "--trials", "10", "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("S1"));

    let out = superposition(&["axioms", "--measure", "broken_l1", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_subcommand() {
    assert_eq!(superposition(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(superposition(&["--help"]).status.code(), Some(0));
}
