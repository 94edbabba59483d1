use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use virtbench_cli::{run, EXIT_OK, EXIT_RUN, EXIT_USAGE};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("virtbench").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn llm_subset_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("fcsp-llm");
    let (code, out, err) = invoke(&[
        "--system", "fcsp",
        "--iterations", "20",
        "--warmup", "2",
        "--metrics", "LLM-001,LLM-002,LLM-003,LLM-004",
        "--output", prefix.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("BUD-FCSP"), "{out}");
    for ext in ["json", "csv", "txt"] {
        assert!(prefix.with_extension(ext).is_file(), "missing .{ext}");
    }
    let v = read_json(&prefix.with_extension("json"));
    let ids: Vec<&str> = v["metrics"].as_array().unwrap().iter().map(|m| m["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["LLM-001", "LLM-002", "LLM-003", "LLM-004"]);
    assert_eq!(v["config"]["iterations"], 20);
    let csv = fs::read_to_string(prefix.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn missing_compare_file_is_a_run_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let prefix = dir.path().join("out");
    let (code, _, err) = invoke(&[
        "--system", "hami",
        "--metrics", "OH-001",
        "--compare", missing.to_str().unwrap(),
        "--output", prefix.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_RUN);
    assert!(err.contains("missing.json"), "{err}");
    assert!(!prefix.with_extension("json").exists());
}

#[test]
fn compare_against_previous_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("hami");
    let cur = dir.path().join("fcsp");
    let (code, _, err) = invoke(&["--system", "hami", "--metrics", "OH-001,OH-002", "--output", base.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let base_json = base.with_extension("json");
    let (code, out, err) = invoke(&[
        "--system", "fcsp",
        "--metrics", "OH-001,OH-002",
        "--compare", base_json.to_str().unwrap(),
        "--output", cur.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("OH-001"), "{out}");
}

#[test]
fn same_seed_gives_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in ["a", "b"] {
        let prefix = dir.path().join(name);
        let (code, _, err) = invoke(&["--system", "hami", "--metrics", "OH-001", "--seed", "7", "--output", prefix.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{err}");
        let mut v = read_json(&prefix.with_extension("json"));
        v.as_object_mut().unwrap().remove("generated_at");
        reports.push(v);
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0]["config"]["seed"], 7);
}

#[test]
fn usage_errors() {
    assert_eq!(invoke(&["--system", "vmware"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["--system", "hami", "--metrics", "OH-99"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["--system", "hami", "--bogus"]).0, EXIT_USAGE);
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("--system"));
}

#[test]
fn bad_calibration_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("bad.cal");
    fs::write(&cal, "this is not a calibration line\n").unwrap();
    let (code, _, err) = invoke(&[
        "--system", "native",
        "--metrics", "OH-001",
        "--calibration", cal.to_str().unwrap(),
        "--output", dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_RUN);
    assert!(err.contains("bad.cal"), "{err}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_virtbench");
    let dir = tempfile::tempdir().unwrap();
    let run = Command::new(bin)
        .args(["--system", "mig", "--metrics", "IS-005", "--output"])
        .arg(dir.path().join("mig"))
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&run.stdout).contains("grade A+"));
    let out = Command::new(bin).args(["--system", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(!out.stderr.is_empty());
}
