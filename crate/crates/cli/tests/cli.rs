use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_multistop");

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    // the command may exit before reading its input
    let _ = pipe.write_all(stdin.unwrap_or("").as_bytes());
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn error_json(out: &Output, code: i32) -> Value {
    assert_eq!(out.status.code(), Some(code));
    serde_json::from_slice(&out.stderr).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn cell(rows: &[Vec<String>], steps: usize, stops: usize) -> f64 {
    rows[steps - 1][stops].parse().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn lognormal_value_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["value-table", "--preset", "lognormal", "--out", out]);
    let rows = csv_rows(&dir.path().join("value_table.csv"));
    assert_eq!(rows.len(), 10);
    for (l, k, v) in [(1, 1, -1.65), (2, 1, -1.02), (7, 4, -3.32), (10, 9, -11.78)] {
        assert!((cell(&rows, l, k) - v).abs() <= 0.01, "v^{{{l},{k}}}");
    }
    assert!(rows[0][2].is_empty(), "cells above the diagonal stay blank");
    let th = csv_rows(&dir.path().join("thresholds.csv"));
    assert_eq!(th.len(), 10);
}

#[test]
fn single_claim_and_ilp_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "value-table",
        "--preset",
        "lognormal",
        "--years",
        "6",
        "--k",
        "1",
        "--out",
        out,
    ]);
    let rows = csv_rows(&dir.path().join("value_table.csv"));
    assert!(rows.iter().all(|r| r.len() == 2));
    let col: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(col.windows(2).all(|w| w[0] < w[1]));

    let cfg = write_config(
        dir.path(),
        "ilp.json",
        r#"{"frequency":{"rate":4},"severity":{"mu":1,"lambda":3},"policy":{"kind":"ilp","param":1},
            "objective":"local","horizon":{"T":8,"k":3}}"#,
    );
    ok(&["value-table", "--config", &cfg, "--out", out]);
    let rows = csv_rows(&dir.path().join("value_table.csv"));
    assert!((cell(&rows, 1, 1) + 4.0).abs() < 1e-9);
}

#[test]
fn advisor_replays_sequence() {
    let input = "-0.57\n-0.79\nx\n-4.75\n-1.07\n-1.14\n-5.56\n-1.59\n";
    let out = run(
        &["advise", "--preset", "lognormal", "--years", "7", "--k", "4"],
        Some(input),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("year 1 (4 claim(s) left, threshold -1.53"), "{text}");
    assert!(text.contains("not a number: `x`"));
    assert!(
        text.contains("claimed in years 1, 2, 4, 7; realized gain -4.0200"),
        "{text}"
    );
}

#[test]
fn advisor_rejects_loss_flag_for_global_objective() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "alp.json",
        r#"{"frequency":{"rate":3},"severity":{"mu":2,"lambda":3},"policy":{"kind":"alp","param":10},
            "objective":"global","horizon":{"T":8,"k":3}}"#,
    );
    let e = error_json(&run(&["advise", "--config", &cfg, "--loss"], Some("1\n")), 2);
    assert_eq!(e["error"]["kind"], "config");
}

#[test]
fn experiment_outputs_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&[
            "experiment",
            "--preset",
            "pap-study",
            "--paths",
            "3000",
            "--seed",
            "7",
            "--out",
            d.path().to_str().unwrap(),
        ]);
    }
    let ra = std::fs::read(a.path().join("report.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.path().join("report.json")).unwrap());
    let report: Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(report["optimal_beats_all"], true);
    assert_eq!(report["preset"]["seed"], 7);
    let names: Vec<&str> = report["studies"][0]["rules"]["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["optimal", "deterministic(1-5-8)", "random", "average"]);

    let hist = std::fs::read_to_string(a.path().join("hist.csv")).unwrap();
    assert!(hist.starts_with("objective,rule,bin_lo,bin_hi,count"));
    let triples = std::fs::read_to_string(a.path().join("triples.csv")).unwrap();
    assert!(triples.starts_with("objective,tau1,tau2,tau3,count,frequency"));
}

#[test]
fn unknown_preset_is_a_config_error() {
    let e = error_json(&run(&["experiment", "--preset", "nope"], None), 2);
    assert!(e["error"]["message"].as_str().unwrap().contains("nope"));
    error_json(&run(&["value-table", "--config", "/definitely/missing.json"], None), 2);
}

#[test]
fn approx_on_gamma_source() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.json",
        r#"{"source":{"kind":"gamma","shape":2.5,"rate":1.5}}"#,
    );
    ok(&["approx", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    let fit: Value = serde_json::from_slice(&std::fs::read(dir.path().join("fit.json")).unwrap()).unwrap();
    assert!(fit["fit"]["a3"].as_f64().unwrap().abs() < 1e-12);
    assert!(fit["fit"]["a4"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(fit["positivity"]["status"], "positive");
    assert!(fit.get("constrained").is_none());
    let boundary = std::fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    assert!(boundary.starts_with("u,mu3,mu4\n"));
    assert!(boundary.lines().count() > 100);
}

fn monic_l4(a: f64, u: f64) -> f64 {
    u.powi(4) - 4.0 * (a + 3.0) * u.powi(3) + 6.0 * (a + 3.0) * (a + 2.0) * u * u
        - 4.0 * (a + 3.0) * (a + 2.0) * (a + 1.0) * u
        + (a + 3.0) * (a + 2.0) * (a + 1.0) * a
}

#[test]
fn approx_refits_out_of_region_moments() {
    // a = 2, mu3 on the gamma value and mu4 = 15 give A3 = 0 and A4 = -1/320,
    // so the bracket 1 - L4(u)/320 goes negative for large u.
    assert!(1.0 - monic_l4(2.0, 40.0) / 320.0 < 0.0);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.json",
        r#"{"source":{"kind":"scaled_moments","mean":2,"variance":2,"mu3":4,"mu4":15}}"#,
    );
    ok(&["approx", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    let fit: Value = serde_json::from_slice(&std::fs::read(dir.path().join("fit.json")).unwrap()).unwrap();
    assert!((fit["fit"]["a4"].as_f64().unwrap() + 1.0 / 320.0).abs() < 1e-15);
    assert_eq!(fit["positivity"]["status"], "violated");
    let c = &fit["constrained"];
    assert_eq!(c["positivity"]["status"], "positive");
    assert_eq!(c["refit"]["original_mu4"], 15.0);
    assert!(c["moments"]["mu4"].as_f64().unwrap() != 15.0);
}

#[test]
fn approx_rejects_degenerate_variance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.json",
        r#"{"source":{"kind":"moments","mean":2,"variance":0,"m3":0,"m4":1}}"#,
    );
    let e = error_json(
        &run(
            &["approx", "--config", &cfg, "--out", dir.path().to_str().unwrap()],
            None,
        ),
        2,
    );
    assert_eq!(e["error"]["kind"], "config");
}

#[test]
fn validate_passes() {
    let text = ok(&["validate"]);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{text}");
}
