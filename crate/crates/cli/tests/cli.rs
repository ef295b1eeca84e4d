use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn opial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opial"))
        .args(args)
        .env_remove("OPIAL_BUDGET")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: stdout {:?} stderr {:?}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn uniform_n(n: usize) -> String {
    let atoms: Vec<String> = (1..=n).map(|i| format!("[{i}, {}]", 1.0 / n as f64)).collect();
    format!(r#"{{"atoms": [{}]}}"#, atoms.join(", "))
}

#[test]
fn verify_constant_on_uniform_integers_is_equality() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "u10.json", &uniform_n(10));
    for id in ["thm1-lower", "thm1-upper"] {
        let out = opial(&["verify", "--dist", dist.to_str().unwrap(), "--functional", id, "--psi", "constant"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let report = stdout_json(&out);
        assert_eq!(report["functional"], id);
        assert_eq!(report["equality"], true);
        assert_eq!(report["exact"], true);
        assert!((report["terms"]["rhs"].as_f64().unwrap() - 0.5).abs() < 1e-15);
        for key in ["terms", "slack", "ratio", "equality", "m", "exact"] {
            assert!(report.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn oracle_diff_agrees_for_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "mixed.json", r#"{"atoms": [[1.5, 0.3]], "pieces": [{"lo": 0, "hi": 1, "mass": 0.7}]}"#);
    let out = opial(&[
        "oracle-diff",
        "--dist",
        dist.to_str().unwrap(),
        "--functional",
        "thm2",
        "--n",
        "2",
        "--m",
        "6",
        "--psi",
        "identity",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let diff = stdout_json(&out);
    assert_eq!(diff["agree"], true);
    assert_eq!(diff["n"], 2);
    assert!(diff["rel_err"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn converge_writes_csv() {
    let out = opial(&["converge", "--functional", "wirtinger", "--grids", "20,40,80"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,value,error,fitted_order"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.iter().map(|r| r[0] as usize).collect::<Vec<_>>(), [20, 40, 80]);
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2]));
    assert!((rows[0][3] - 2.0).abs() < 0.05, "fitted order {}", rows[0][3]);
}

#[test]
fn converge_json_on_request() {
    let out = opial(&["converge", "--functional", "thm2", "--n", "1", "--grids", "8,16", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = stdout_json(&out);
    assert_eq!(table["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn mass_within_tolerance_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "d.json", r#"{"atoms": [[0, 0.5], [1, 0.499999999999]]}"#);
    let out = opial(&["verify", "--dist", dist.to_str().unwrap(), "--functional", "thm1-lower"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let dist = write(dir.path(), "e.json", r#"{"atoms": [[0, 0.5], [1, 0.49]]}"#);
    let out = opial(&["verify", "--dist", dist.to_str().unwrap(), "--functional", "thm1-lower"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("e.json"), "{}", stderr(&out));
}

#[test]
fn overlapping_pieces_name_both_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(
        dir.path(),
        "overlap.json",
        r#"{"pieces": [{"lo": 0, "hi": 1, "mass": 0.5}, {"lo": 0.5, "hi": 2, "mass": 0.5}]}"#,
    );
    let out = opial(&["verify", "--dist", dist.to_str().unwrap(), "--functional", "thm1-lower"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("overlap.json"), "{err}");
    assert!(err.contains("(0, 1)") && err.contains("(0.5, 2)"), "{err}");
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "bad.json", "{\"atoms\": [[0, 1]],\n \"extra\": 1}");
    let out = opial(&["verify", "--dist", dist.to_str().unwrap(), "--functional", "thm1-lower"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.json:2:"), "{}", stderr(&out));
}

#[test]
fn wrong_length_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "u4.json", &uniform_n(4));
    let out = opial(&[
        "verify",
        "--dist",
        dist.to_str().unwrap(),
        "--functional",
        "thm1-lower",
        "--psi",
        "values:1,2,3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("expected 4"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["verify", "--functional", "thm1-lower"][..],
        &["verify", "--functional", "nope"],
        &["frobnicate"],
        &["verify", "--functional", "o15", "--psi", "values:1,2"],
        &["sharpness", "--functional", "thm3"],
        &["verify", "--functional", "o9-1", "--psi", "values:1", "--format", "csv"],
    ] {
        let out = opial(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn violation_exits_two() {
    // (1, √3-1, 1) exceeds the three-point pair-distance bound.
    let b = 3f64.sqrt() - 1.0;
    let psi = format!("values:1,{b},1");
    let out = opial(&["verify", "--functional", "rtwo", "--psi", &psi]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stdout_json(&out)["slack"].as_f64().unwrap() < 0.0);
}

#[test]
fn out_file_round_trips_canonical_report() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "u5.json", &uniform_n(5));
    let target = dir.path().join("report.json");
    let out = opial(&[
        "verify",
        "--dist",
        dist.to_str().unwrap(),
        "--functional",
        "thm3",
        "--psi",
        r#"{"kind": "values", "values": [1, -2, 0.5, 3, 1]}"#,
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("{\n  \"functional\": \"thm3\",\n  \"terms\""), "{text}");
    let parsed: Value = serde_json::from_str(&text).unwrap();
    let reparsed: Value = serde_json::from_str(&serde_json::to_string(&parsed).unwrap()).unwrap();
    assert_eq!(parsed, reparsed);
    let lhs = parsed["terms"]["lhs"].as_f64().unwrap();
    assert_eq!(format!("{lhs:?}"), text.split("\"lhs\": ").nth(1).unwrap().split(',').next().unwrap());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn psi_from_file_and_bare_array() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "u3.json", &uniform_n(3));
    let tagged = write(dir.path(), "psi.json", r#"{"kind": "values", "values": [1, 2, 3]}"#);
    let bare = write(dir.path(), "bare.json", "[1, 2, 3]");
    let run = |psi: &Path| {
        let out = opial(&[
            "verify",
            "--dist",
            dist.to_str().unwrap(),
            "--functional",
            "thm1-upper",
            "--psi",
            psi.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        out.stdout
    };
    assert_eq!(run(&tagged), run(&bare));
}

#[test]
fn search_is_deterministic() {
    let args = ["search", "--functional", "weighted-upper", "--trials", "300", "--m", "12", "--seed", "11"];
    let a = opial(&args);
    let b = opial(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["violation"], Value::Null);
}

#[test]
fn small_budget_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "u10.json", &uniform_n(10));
    let out = Command::new(env!("CARGO_BIN_EXE_opial"))
        .args(["oracle-diff", "--dist", dist.to_str().unwrap(), "--functional", "thm3"])
        .env("OPIAL_BUDGET", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn sharpness_commands() {
    let dir = tempfile::tempdir().unwrap();
    let dist = write(dir.path(), "u6.json", &uniform_n(6));
    let out = opial(&["sharpness", "--dist", dist.to_str().unwrap(), "--functional", "thm1-lower"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = stdout_json(&out);
    assert!((r["ratio_star"].as_f64().unwrap() - 1.0).abs() < 1e-9);

    let out = opial(&["sharpness", "--functional", "wirtinger", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!((stdout_json(&out)["c_m"].as_f64().unwrap() - 0.125).abs() < 1e-12);
}

#[test]
fn troy_defaults_to_unit_interval() {
    let out = opial(&["verify", "--functional", "troy", "--weight-exp", "1", "--psi", "identity", "--m", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = stdout_json(&out);
    assert!((r["terms"]["lhs"].as_f64().unwrap() - 0.1).abs() < 1e-5);
    assert!((r["terms"]["rhs"].as_f64().unwrap() - 1.0 / (6.0 * 2f64.sqrt())).abs() < 1e-5);
}
