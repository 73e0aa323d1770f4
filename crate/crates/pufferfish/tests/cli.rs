// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use pufferfish::bench::{Report, REPORT_SCHEMA};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pufferfish")).args(args).output().expect("binary runs")
}

fn run_owned(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pufferfish")).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("config.json");
    std::fs::write(
        &path,
        r#"{"num_states": 6, "length": 40, "num_sequences": 60, "k": 2, "eps_p": [1.0, 4.0], "trials": 3, "draws_per_trial": 20, "curve_b_max": 20}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn bench_writes_every_format_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    for format in ["csv", "json", "markdown"] {
        let o = run(&["--config", &cfg, "--seed", "3", "--out", out_s, "--format", format, "bench"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let md = std::fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("Ours-Exp") && md.contains('±'));

    let again = run(&["--config", &cfg, "--seed", "3", "--format", "csv", "bench"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), csv);
    let other = run(&["--config", &cfg, "--seed", "4", "--format", "csv", "bench"]);
    assert_ne!(String::from_utf8(other.stdout).unwrap(), csv);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    assert!(validator.is_valid(&json));
    let report = Report::validate_json(&json).unwrap();
    assert_eq!(Report::from_csv(&csv).unwrap(), report.rows);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"num_states": 1}"#).unwrap();
    assert_eq!(run(&["--config", bad.to_str().unwrap(), "bench"]).status.code(), Some(2));
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"typo": 1}"#).unwrap();
    assert_ne!(run(&["--config", unknown.to_str().unwrap(), "bench"]).status.code(), Some(0));
    assert_eq!(run(&["curve", "--p", "1.5", "--q", "0.5"]).status.code(), Some(2));

    let curve = dir.path().join("curve.json");
    let o = run(&["--out", dir.path().to_str().unwrap(), "curve", "--p", "0.8", "--q", "0.7", "--b-max", "6"]);
    assert!(o.status.success());
    assert!(curve.exists());
    let data = dir.path().join("data.json");
    std::fs::write(&data, "[4, 0, 7]").unwrap();
    let ledger = dir.path().join("spent.jsonl");
    let args = |eps: &'static str| {
        vec![
            "mechanize".to_owned(),
            "--mechanism".into(),
            "laplace".into(),
            "--curve".into(),
            curve.to_str().unwrap().into(),
            "--data".into(),
            data.to_str().unwrap().into(),
            "--entries".into(),
            "3".into(),
            "--eps-p".into(),
            eps.into(),
            "--ledger".into(),
            ledger.to_str().unwrap().into(),
            "--cap".into(),
            "3".into(),
        ]
    };
    assert!(run_owned(&args("2.0")).status.success());
    let o = run_owned(&args("2.0"));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&ledger).unwrap().lines().count(), 1);

    let o = run(&["budget", "--ledger", ledger.to_str().unwrap(), "--cap", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pufferfish_total"], 2.0);
}

#[test]
fn nfc_check_writes_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("rr.json");
    std::fs::write(
        &m,
        r#"{"datasets": [{"id": 0, "secrets": ["yes"]}, {"id": 1, "secrets": ["no"]}],
            "outputs": ["Y", "N"], "probs": [[0.75, 0.25], [0.25, 0.75]]}"#,
    )
    .unwrap();
    let o = run(&["--out", dir.path().to_str().unwrap(), "nfc-check", "--matrix", m.to_str().unwrap(), "--eps", "1.1"]);
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("necessary conditions hold"), "{table}");
    let certs: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("nfc_certificates.json")).unwrap()).unwrap();
    assert_eq!(certs["certificates"].as_array().unwrap().len(), 2);
}

#[test]
fn collapse_demo_reports_three_runs() {
    let o = run(&["--seed", "11", "collapse-demo", "--example", "2", "--trials", "20000"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["expected_runs"], 3.0);
    assert_eq!(v["two_run_eps0"], "inf");
    assert_eq!(v["runs"]["unsound"], 0);
    let mean = v["runs"]["mean"].as_f64().unwrap();
    let se = v["runs"]["stderr"].as_f64().unwrap();
    assert!((mean - 3.0).abs() <= 4.0 * se);
}
