use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn dusar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dusar"))
        .args(args)
        .env_remove("DUSAR_ENDPOINT")
        .env_remove("DUSAR_API_KEY")
        .env_remove("DUSAR_MODEL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn oracle_run_writes_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = dusar(&["run", "--task-type", "heat", "--seed", "4", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("success: true"));
    let trace = dir.path().join("heat-s4-full.trace.jsonl");
    assert!(trace.is_file());
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("heat-s4-full.report.json")).unwrap()).unwrap();
    assert_eq!(report["success"], true);
}

#[test]
fn scripted_saltshaker_prints_scores() {
    let dir = tempfile::tempdir().unwrap();
    let provider = format!("scripted:{}", fixture("saltshaker.fixture.jsonl").display());
    let task = fixture("saltshaker.task");
    let o = dusar(&[
        "run",
        "--task",
        task.to_str().unwrap(),
        "--provider",
        &provider,
        "--max-steps",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("scores: 25,25,25,25,25,50\n"), "{text}");
    assert!(text.contains("Step | Observation"));
}

#[test]
fn wire_without_endpoint_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = dusar(&["run", "--provider", "wire", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("DUSAR_ENDPOINT"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(dusar(&["run", "--mode", "sideways"]).status.code(), Some(2));
    assert_eq!(dusar(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(dusar(&["run", "--task", "/no/such.task"]).status.code(), Some(2));
    assert_eq!(dusar(&["run", "--provider", "scripted"]).status.code(), Some(2));
}

#[test]
fn eval_summaries_have_token_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for mode in ["full", "local_only"] {
        let o = dusar(&["eval", "--per-family", "1", "--mode", mode, "--parallelism", "2", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = std::fs::read_to_string(dir.path().join(format!("summary-{mode}.jsonl"))).unwrap();
        let rows: Vec<Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .filter(|v: &Value| v["record"] == "row")
            .collect();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[6]["task_type"], "All");
        for r in &rows {
            assert_eq!(r["mode"], mode);
            assert!(r["mean_prompt_tokens_per_step"].as_f64().unwrap() > 0.0);
            assert!(r["mean_completion_tokens_per_step"].as_f64().unwrap() > 0.0);
        }
    }
}

#[test]
fn replay_accepts_valid_and_rejects_tampered() {
    let dir = tempfile::tempdir().unwrap();
    let o = dusar(&["replay", fixture("saltshaker.trace.jsonl").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("open cabinet 2"));

    let text = std::fs::read_to_string(fixture("saltshaker.trace.jsonl")).unwrap();
    let tampered = text.replacen("\"score\":50", "\"score\":150", 1);
    assert_ne!(tampered, text);
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, tampered).unwrap();
    let o = dusar(&["replay", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("150") || stderr(&o).contains("150"));

    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(dusar(&["replay", empty.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = dusar(&["run", "--task-type", "puttwo", "--seed", "9", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("puttwo-s9-full.trace.jsonl")).unwrap();
    assert_eq!(read(&a), read(&b));
}
