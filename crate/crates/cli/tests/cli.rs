//! The `nonherm` binary: flags, config files, output and exit codes.

use std::fs;
use std::process::{Command, Output};

use nonherm::experiments::read_csv;

fn nonherm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonherm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn model_b_final_values_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let o = nonherm(&["model-b", "--sample-every", "1000", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l == "t,k,method,sx,sy,sz,norm"));
    assert!(text.contains("# reference metric_limit"));
    let out = read_csv(&text).unwrap();
    let last = |m: &str| out.rows.iter().rfind(|r| r.method == m).unwrap().sz;
    assert!((last("metric") + 0.111).abs() < 1e-3);
    assert!((last("nj") + 0.745).abs() < 1e-3);
    assert!((last("me") + 0.818).abs() < 1e-3);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"scenario": "model_a", "gamma": 0.25, "t_max": 0.5, "methods": ["me"], "sample_every": 100}"#).unwrap();
    let o = nonherm(&["model-a", "--config", cfg.to_str().unwrap(), "--t-max", "0.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = read_csv(&stdout(&o)).unwrap();
    assert!(out.metadata.iter().any(|m| m.contains(r#""gamma":0.25"#) && m.contains(r#""t_max":0.2"#)));
    assert_eq!(out.rows.last().unwrap().t, 0.2);
    assert!(out.rows.iter().all(|r| r.method == "me"));
}

#[test]
fn runs_are_byte_identical() {
    let args = ["sweep", "--t-start", "-2", "--t-max", "2", "--k-grid", "-0.5,0.5,1.5,-1.5"];
    let a = nonherm(&args);
    let b = nonherm(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let out = read_csv(&stdout(&a)).unwrap();
    assert_eq!(out.rows.first().unwrap().k, Some(-1.5));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"omgea": 1.0}"#).unwrap();
    let wrong = dir.path().join("wrong.json");
    fs::write(&wrong, r#"{"scenario": "sweep"}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["model-a", "--dt", "0"],
        vec!["model-a", "--dt", "-1"],
        vec!["model-b", "--initial", "bloch:1,1,1"],
        vec!["model-b", "--initial", "amp:1,0,1,0"],
        vec!["model-b", "--initial", "bloch:0,0,0.5"],
        vec!["model-b", "--methods", "magic"],
        vec!["sweep", "--k-grid", "-1,1"],
        vec!["sweep", "--k-grid", "0.5"],
        vec!["model-a", "--config", bad.to_str().unwrap()],
        vec!["model-a", "--config", wrong.to_str().unwrap()],
        vec!["model-a", "--config", "/nonexistent/c.json"],
        vec!["model-a", "--bogus"],
    ];
    for args in cases {
        let o = nonherm(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_3_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let o = nonherm(&[
        "model-a", "--gamma", "5", "--initial", "bloch:0,0,1", "--methods", "nj", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("norm underflow"));
    assert!(!path.exists());
}

#[test]
fn verify_reports_and_fails_on_coarse_step() {
    let o = nonherm(&["verify", "--dt", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("[FAIL] 8b")), "{text}");
}
