use std::path::PathBuf;
use std::process::{Command, Output};

use lockdown_core::PolyModel;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn lockdown(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lockdown")).args(args).output().unwrap()
}

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn optimize(extra: &[&str]) -> Output {
    let csv = data("delhi_2021.csv");
    let scenario = data("delhi_scenario.json");
    let mut args = vec!["optimize", "--data", s(&csv), "--scenario", s(&scenario), "--end", "2021-04-06"];
    args.extend_from_slice(extra);
    lockdown(&args)
}

#[test]
fn fit_prints_a_quartic_model() {
    let out = lockdown(&["fit", "--data", s(&data("delhi_2021.csv")), "--window", "60", "--end", "2021-04-06", "--format", "json"]);
    assert!(out.status.success());
    let model: PolyModel = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(model.coefficients.len(), 5);
    assert_eq!(model.fit_window, (1, 60));
    // the documented schema round-trips
    assert_eq!(serde_json::to_string_pretty(&model).unwrap() + "\n", stdout(&out));
}

#[test]
fn fit_errors_map_to_exit_codes() {
    let missing = lockdown(&["fit", "--data", "/nonexistent/delhi.csv"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("ReadError"));
    assert!(missing.stdout.is_empty());

    let short = lockdown(&["fit", "--data", s(&data("delhi_window.csv")), "--window", "3"]);
    assert_eq!(short.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&short.stderr).contains("InsufficientData"));

    let usage = lockdown(&["fit", "--data", s(&data("delhi_window.csv")), "--weights", "triangular"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(lockdown(&["fit"]).status.code(), Some(2));

    let ill = lockdown(&["fit", "--data", s(&data("delhi_window.csv")), "--degree", "40"]);
    assert_eq!(ill.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&ill.stderr).contains("SingularSystem"));
}

#[test]
fn optimize_reports_three_days_for_delhi() {
    let json = optimize(&["--format", "json"]);
    assert!(json.status.success());
    let text = stdout(&json);
    assert!(text.contains("\"delta_opt\": 3"));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["lockdown_date"], "2021-04-10");
    assert_eq!(v["window"]["start"], "2021-02-06");

    let report = stdout(&optimize(&[]));
    assert!(report.contains("delta = 3"), "{report}");
    assert!(report.contains("recommended lockdown start: 2021-04-10"));
}

#[test]
fn published_model_gives_the_same_decision() {
    let out = optimize(&["--model", s(&data("delhi_reported_model.json")), "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["delta_opt"], 3);
    assert_eq!(v["binding"][0]["day_index"], 78);
    assert_eq!(v["model"]["coefficients"][0], 0.006);
}

#[test]
fn ample_capacity_is_unbounded() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("roomy.json");
    std::fs::write(
        &path,
        r#"{"resources": [{"id": "oxygen", "requirement_factor": 0.00817, "availability": [[1, 1e9]]}]}"#,
    )
    .unwrap();
    let out = lockdown(&[
        "optimize", "--data", s(&data("delhi_2021.csv")), "--scenario", path.to_str().unwrap(),
        "--end", "2021-04-06", "--format", "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "unbounded_at_delta_max");
    assert_eq!(v["delta_opt"], 21);
}

#[test]
fn tpr_cap_below_current_positivity_is_infeasible_now() {
    let out = optimize(&["--tpr-cap", "0.01", "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "infeasible_now");
    assert!(v["tpr_model"].is_object());
    let first = &v["binding"][0];
    assert_eq!(first["constraint_id"], "tpr");
    assert_eq!(first["day_index"], 60);
    assert!(first["required"].as_f64().unwrap() > 0.03);
}

#[test]
fn replay_rows_follow_the_calendar() {
    let csv = data("delhi_2021.csv");
    let scenario = data("delhi_scenario.json");
    let base = ["replay", "--data", s(&csv), "--scenario", s(&scenario)];

    let week = lockdown(&[&base[..], &["--from", "2021-04-01", "--to", "2021-04-06"]].concat());
    assert!(week.status.success());
    let text = stdout(&week);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "date,status,delta_opt,lockdown_date,binding");
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("2021-04-06,optimal,3,2021-04-10,"));

    // a one-day replay is the optimize run for that day
    let one = lockdown(&[&base[..], &["--from", "2021-04-06", "--to", "2021-04-06", "--format", "json"]].concat());
    let rows: Value = serde_json::from_str(&stdout(&one)).unwrap();
    let single: Value = serde_json::from_str(&stdout(&optimize(&["--format", "json"]))).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["delta_opt"], single["delta_opt"]);
    assert_eq!(rows[0]["status"], single["status"]);
    assert_eq!(rows[0]["lockdown_date"], single["lockdown_date"]);

    let backwards = lockdown(&[&base[..], &["--from", "2021-04-06", "--to", "2021-04-01"]].concat());
    assert_eq!(backwards.status.code(), Some(2));

    let early = lockdown(&[&base[..], &["--from", "2021-01-05", "--to", "2021-01-06"]].concat());
    assert_eq!(early.status.code(), Some(3));
}

#[test]
fn predict_lists_the_days_after_the_window() {
    let out = lockdown(&[
        "predict", "--data", s(&data("delhi_2021.csv")), "--end", "2021-04-06", "--days", "17",
        "--model", s(&data("delhi_reported_model.json")),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    // 0.006 t^4 - 0.518 t^3 + 16.088 t^2 - 175.33 t + 1344.983 at t = 77
    assert!(last.starts_with("2021-04-23,77,57664."), "{last}");
    assert_eq!(text.lines().count(), 18);
}

#[test]
fn optimize_output_is_deterministic() {
    let a = optimize(&["--format", "json"]).stdout;
    let b = optimize(&["--format", "json"]).stdout;
    assert_eq!(a, b);
}
