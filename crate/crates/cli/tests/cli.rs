use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn akconj(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_akconj"))
        .args(args)
        .current_dir(dir)
        .env_remove("AKCONJ_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn denominators(v: &Value) -> Vec<String> {
    v["stages"].as_array().unwrap().iter().map(|s| s["q"].as_str().unwrap().to_string()).collect()
}

#[test]
fn base_ten_schedule_has_known_denominators() {
    let tmp = TempDir::new().unwrap();
    let o = akconj(&["schedule", "--stages", "2", "--base", "10", "--c", "constant:1", "--out", "s"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&tmp.path().join("s/schedule.json"));
    assert_eq!(denominators(&doc["schedule"]), ["4", "40016"]);
    assert_eq!(doc["passed"], Value::Bool(true));
    assert!(!doc["certificates"].as_array().unwrap().is_empty());
}

#[test]
fn verify_rejects_a_tampered_denominator() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&akconj(&["schedule", "--stages", "2", "--base", "10", "--out", "s"], tmp.path())), 0);
    let good = tmp.path().join("s/schedule.json");
    assert_eq!(code(&akconj(&["verify", "--schedule", good.to_str().unwrap()], tmp.path())), 0);

    let mut doc = json(&good);
    doc["schedule"]["stages"][1]["q"] = Value::String("12".into());
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = akconj(&["verify", "--schedule", bad.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));

    // A bare schedule is accepted too.
    let bare = tmp.path().join("bare.json");
    std::fs::write(&bare, serde_json::to_string(&doc["schedule"]).unwrap()).unwrap();
    assert_eq!(code(&akconj(&["verify", "--schedule", bare.to_str().unwrap(), "--base", "10"], tmp.path())), 1);
}

#[test]
fn harmonic_run_writes_a_passing_report() {
    let tmp = TempDir::new().unwrap();
    let o = akconj(&["theorem2", "--stages", "3", "--base", "2", "--out", "runs/t2"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let dir = tmp.path().join("runs/t2");
    let report = json(&dir.join("report.json"));
    assert_eq!(report["variant"], "theorem2");
    assert_eq!(report["evidence"]["kind"], "minimal_non_ergodic");
    for art in report["artifacts"].as_array().unwrap() {
        assert!(dir.join(art["path"].as_str().unwrap()).is_file());
    }
    assert_eq!(code(&akconj(&["report", "--input", "runs/t2/report.json"], tmp.path())), 0);
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let cases: &[&[&str]] = &[
        &["theorem1", "--base", "1"],
        &["schedule", "--emit", "png"],
        &["schedule", "--config", "missing.json"],
        &["theorem2", "--stages", "1"],
        &["orbit", "--observable", "char:1"],
        &["report", "--input", "missing.json"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(code(&akconj(args, tmp.path())), 2, "{args:?}");
    }
    std::fs::write(tmp.path().join("cfg.json"), r#"{"stages": "two"}"#).unwrap();
    assert_eq!(code(&akconj(&["schedule", "--config", "cfg.json"], tmp.path())), 2);
}

#[test]
fn thread_cap_is_validated() {
    let tmp = TempDir::new().unwrap();
    for (value, expected) in [("abc", 2), ("0", 2), ("1", 0)] {
        let o = Command::new(env!("CARGO_BIN_EXE_akconj"))
            .args(["schedule", "--out", "s"])
            .current_dir(tmp.path())
            .env("AKCONJ_THREADS", value)
            .output()
            .unwrap();
        assert_eq!(code(&o), expected, "AKCONJ_THREADS={value}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"stages": 2, "policy": {"base": 10}, "out": "fromfile"}"#).unwrap();
    assert_eq!(code(&akconj(&["schedule", "--config", "cfg.json"], tmp.path())), 0);
    assert_eq!(denominators(&json(&tmp.path().join("fromfile/schedule.json"))["schedule"]), ["4", "40016"]);
    assert_eq!(code(&akconj(&["schedule", "--config", "cfg.json", "--base", "2", "--out", "flag"], tmp.path())), 0);
    assert_eq!(denominators(&json(&tmp.path().join("flag/schedule.json"))["schedule"])[1], "16464");
}

#[test]
fn checkpoint_csv_round_trips() {
    let tmp = TempDir::new().unwrap();
    let o = akconj(&["orbit", "--iterates", "3000", "--out", "o", "--emit", "json,csv,svg"], tmp.path());
    assert_eq!(code(&o), 0);
    let dir = tmp.path().join("o");
    let doc = json(&dir.join("orbit.json"));
    let checkpoints = doc["checkpoints"].as_array().unwrap();
    let mut rd = csv::Reader::from_path(dir.join("checkpoints.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["k", "re", "im", "deviation"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), checkpoints.len());
    for (row, cp) in rows.iter().zip(checkpoints) {
        assert_eq!(row[0].parse::<u64>().unwrap(), cp["k"].as_u64().unwrap());
        let re: f64 = row[1].parse().unwrap();
        let im: f64 = row[2].parse().unwrap();
        assert!((re - cp["average"][0].as_f64().unwrap()).abs() < 1e-12);
        assert!((im - cp["average"][1].as_f64().unwrap()).abs() < 1e-12);
    }
    let orbit = csv::Reader::from_path(dir.join("orbit.csv")).unwrap().records().count();
    assert_eq!(orbit, 3001);
    let svg = std::fs::read_to_string(dir.join("orbit.svg")).unwrap();
    assert!(svg.contains(r#"version="1.1""#));
}

#[test]
fn reports_are_deterministic_and_leave_no_temporaries() {
    let tmp = TempDir::new().unwrap();
    for out in ["a", "b"] {
        assert_eq!(code(&akconj(&["theorem1", "--stages", "2", "--out", out, "--emit", "json,csv,svg"], tmp.path())), 0);
    }
    let a = std::fs::read(tmp.path().join("a/report.json")).unwrap();
    let b = std::fs::read(tmp.path().join("b/report.json")).unwrap();
    assert_eq!(a, b);
    let names: Vec<String> = std::fs::read_dir(tmp.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().all(|n| !n.starts_with(".tmp")), "{names:?}");
    assert!(names.contains(&"curves.svg".to_string()));
}

#[test]
fn failed_certificates_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    let o = akconj(&["measure", "--observable", "char:1:1", "--out", "m"], tmp.path());
    assert_eq!(code(&o), 1);
    let doc = json(&tmp.path().join("m/measure.json"));
    assert_eq!(doc["passed"], Value::Bool(false));
}
