use std::path::Path;
use std::process::{Command, Output};

use arrmono::pipeline::Report;
use serde_json::Value;

fn arrmono(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arrmono"))
        .env_remove("ARRMONO_CACHE")
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn schema() -> jsonschema::JSONSchema {
    let text = include_str!("../schema/report.schema.json");
    let v: Value = serde_json::from_str(text).unwrap();
    jsonschema::JSONSchema::compile(&v).expect("schema compiles")
}

#[test]
fn build_then_cache_hit() {
    let dir = tempfile::tempdir().unwrap();
    let first = arrmono(dir.path(), &["build"]);
    assert!(first.status.success());
    let s = stdout(&first);
    assert!(s.contains("status: built"), "{s}");
    assert!(s.contains("deg f = 60, 576 terms"), "{s}");
    let second = arrmono(dir.path(), &["--format", "json", "build"]);
    assert!(second.status.success());
    let v: Value = serde_json::from_slice(&second.stdout).unwrap();
    assert_eq!(v["status"], "cache hit");
    assert_eq!(v["degree_f"], 60);
    assert_eq!(v["build_steps_ms"].as_array().unwrap().len(), 0);
}

#[test]
fn corrupted_cache_file_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    assert!(arrmono(dir.path(), &["build"]).status.success());
    let sub = arrmono::cache::cache_subdir(dir.path());
    let file = sub.join("E_22.poly4");
    let mut text = std::fs::read_to_string(&file).unwrap();
    text.push_str("1 0 0 0 1\n");
    std::fs::write(&file, text).unwrap();
    let o = arrmono(dir.path(), &["build"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("rebuilt") && s.contains("sha256 mismatch"), "{s}");
    let again = arrmono(dir.path(), &["build"]);
    assert!(stdout(&again).contains("status: cache hit"));
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_arrmono"))
        .env("ARRMONO_CACHE", dir.path())
        .arg("build")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(arrmono::cache::cache_subdir(dir.path())
        .join(arrmono::cache::MANIFEST)
        .exists());
}

#[test]
fn usage_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["check", "--k", "25"],
        &["--primes", "3", "verify", "freeness"],
        &["--primes", "1000000007,1000000007", "verify", "freeness"],
        &["--primes", "1000000008", "verify", "freeness"],
        &["oracle", "wedge-kernel", "--k", "60"],
        &["verify", "everything"],
        &["--format", "yaml", "build"],
    ];
    for args in cases {
        let o = arrmono(dir.path(), args);
        assert_eq!(o.status.code(), Some(3), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn prime_dividing_486_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = arrmono(dir.path(), &["--primes", "3,1000000007", "report"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains('3'));
}

#[test]
fn fault_injection_changes_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let ok = arrmono(dir.path(), &["verify", "freeness"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = arrmono(
        dir.path(),
        &["--inject-fault", "construction.saito", "verify", "freeness"],
    );
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("REFUTED"));
}

#[test]
fn subcommand_json_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = arrmono(dir.path(), &["--format", "json", "--threads", "1", "check", "--k", "10"]);
    let b = arrmono(dir.path(), &["--format", "json", "--threads", "3", "check", "--k", "10"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["report_version"], 1);
    assert_eq!(v["verdict"], "Proved");
}

#[test]
fn wedge_kernel_oracle_reports_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let o = arrmono(dir.path(), &["--format", "json", "oracle", "wedge-kernel", "--k", "10"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["values"]["dimension_upper_bound"], 0);
}

#[test]
fn full_report_validates_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = arrmono(dir.path(), &["--format", "json", "report"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let v: Value = serde_json::from_str(&text).unwrap();
    let schema = schema();
    if let Err(errors) = schema.validate(&v) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("schema violations: {msgs:#?}");
    }
    let report = Report::from_json(&text).unwrap();
    assert_eq!(report.to_json().trim_end(), text.trim_end());
    assert_eq!(report.conclusion.statement, arrmono::koszul::PROVED_STATEMENT);

    let mut broken = v.clone();
    broken["report_version"] = Value::from(2);
    assert!(!schema.is_valid(&broken));
    let mut broken = v;
    broken["sections"][0]["certificates"][0]["verdict"] = Value::from("Maybe");
    assert!(!schema.is_valid(&broken));
}
