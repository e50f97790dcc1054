use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const KB: &str = r#"{
  "contacts": [
    {"id": "mom", "name": "Mom", "group": "A", "temp_important": false},
    {"id": "pal", "name": "Pal", "group": "C", "temp_important": false}
  ],
  "safety_records": {},
  "devices": [],
  "context_signals": {}
}
"#;

const SCENARIO: &str = r#"{"type":"meta","name":"evening"}
{"t":0,"type":"call_start","caller":"mom"}
{"t":420000,"type":"call_end"}
{"t":500000,"type":"sleep_mode","on":true}
{"t":510000,"type":"call_start","caller":"pal"}
{"t":520000,"type":"message_received","sender":"pal"}
{"t":530000,"type":"snapshot_request"}
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alertagent"))
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_log_and_kb() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "s.jsonl", SCENARIO);
    let kb = write(&dir, "kb.json", KB);
    let out = dir.path().join("log.jsonl");
    let kb_out = dir.path().join("kb-out.json");
    let o = run(&["run", "--scenario", s(&scenario), "--kb", s(&kb), "--out", s(&out), "--kb-out", s(&kb_out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("6 events, "), "{}", stdout(&o));

    let log = fs::read_to_string(&out).unwrap();
    assert!(log.lines().count() >= 4);
    assert!(log.contains(r#""kind":"radiation_incall_warning""#));
    let updated = fs::read_to_string(&kb_out).unwrap();
    assert!(updated.contains(r#""mom""#), "{updated}");
    assert!(updated.contains(r#""unsafe": 1"#), "{updated}");
}

#[test]
fn run_is_repeatable() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "s.jsonl", SCENARIO);
    let kb = write(&dir, "kb.json", KB);
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let o = run(&["run", "--scenario", s(&scenario), "--kb", s(&kb), "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn malformed_line_is_reported_with_its_number() {
    let dir = TempDir::new().unwrap();
    let mut body = String::new();
    for i in 0..6 {
        body.push_str(&format!("{{\"t\":{i},\"type\":\"tick\"}}\n"));
    }
    body.push_str("{\"t\":7,\"type\":\"call_start\"\n");
    let scenario = write(&dir, "bad.jsonl", &body);
    let kb = write(&dir, "kb.json", KB);
    let out = dir.path().join("log.jsonl");
    let o = run(&["run", "--scenario", s(&scenario), "--kb", s(&kb), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 7"), "{}", stderr(&o));
    assert!(stderr(&o).contains("bad.jsonl"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn missing_input_is_invalid() {
    let dir = TempDir::new().unwrap();
    let kb = write(&dir, "kb.json", KB);
    let out = dir.path().join("log.jsonl");
    let o = run(&["run", "--scenario", "/nonexistent/s.jsonl", "--kb", s(&kb), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/s.jsonl"));
}

#[test]
fn unwritable_out_is_internal_error() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "s.jsonl", SCENARIO);
    let kb = write(&dir, "kb.json", KB);
    let out = dir.path().join("no-such-dir").join("log.jsonl");
    let o = run(&["run", "--scenario", s(&scenario), "--kb", s(&kb), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn validate_inputs() {
    let dir = TempDir::new().unwrap();
    let kb = write(&dir, "kb.json", KB);
    assert_eq!(run(&["validate", "--kb", s(&kb)]).status.code(), Some(0));

    let bad_kb = write(&dir, "bad-kb.json", &KB.replace(r#""safety_records": {}"#, r#""safety_records": {"x": {"total": 1, "unsafe": 2}}"#));
    let o = run(&["validate", "--kb", s(&bad_kb)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad-kb.json"));

    let empty = write(&dir, "empty.jsonl", "");
    assert_eq!(run(&["validate", "--scenario", s(&empty)]).status.code(), Some(0));

    let backwards = write(&dir, "back.jsonl", "{\"t\":5,\"type\":\"tick\"}\n{\"t\":4,\"type\":\"tick\"}\n");
    assert_eq!(run(&["validate", "--scenario", s(&backwards)]).status.code(), Some(1));

    let config = write(&dir, "c.json", r#"{"battery_critical_pct": 10}"#);
    assert_eq!(run(&["validate", "--config", s(&config)]).status.code(), Some(0));
    let config = write(&dir, "c2.json", r#"{"battery_critcal_pct": 10}"#);
    assert_eq!(run(&["validate", "--config", s(&config)]).status.code(), Some(1));
}

#[test]
fn validate_needs_exactly_one_input() {
    assert_ne!(run(&["validate"]).status.code(), Some(0));
    let dir = TempDir::new().unwrap();
    let kb = write(&dir, "kb.json", KB);
    let cfg = write(&dir, "c.json", "{}");
    assert_ne!(run(&["validate", "--kb", s(&kb), "--config", s(&cfg)]).status.code(), Some(0));
}

#[test]
fn validate_agrees_with_run() {
    let dir = TempDir::new().unwrap();
    let kb = write(&dir, "kb.json", KB);
    let out = dir.path().join("log.jsonl");
    let cases = [
        SCENARIO,
        "",
        "{\"t\":1,\"type\":\"battery_level\",\"pct\":101}\n",
        "{\"t\":1,\"type\":\"nope\"}\n",
        "{\"t\":1,\"type\":\"user_response\",\"prompt_id\":\"\",\"answer\":\"yes\"}\n",
    ];
    for (i, body) in cases.iter().enumerate() {
        let scenario = write(&dir, &format!("s{i}.jsonl"), body);
        let v = run(&["validate", "--scenario", s(&scenario)]).status.code();
        let r = run(&["run", "--scenario", s(&scenario), "--kb", s(&kb), "--out", s(&out)]).status.code();
        assert_eq!(v, r, "case {i}");
    }
}

const LOG: &str = r#"{"t":1,"seq":0,"kind":"ring","caller":"a","answered":true}
{"t":2,"seq":1,"kind":"ring","caller":"b","answered":false}
{"t":3,"seq":2,"kind":"ring","caller":"a","answered":true}
{"t":4,"seq":3,"kind":"suppress_note","caller":"c","item":"call","reason":"sleep"}
{"t":5,"seq":4,"kind":"suppress_note","caller":"c","item":"message","reason":"sleep"}
"#;

#[test]
fn report_counts_kinds_and_missed_items() {
    let dir = TempDir::new().unwrap();
    let log = write(&dir, "log.jsonl", LOG);
    let o = run(&["report", "--log", s(&log)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "ring: 3"), "{text}");
    assert!(text.lines().any(|l| l == "suppress_note: 2"), "{text}");
    assert!(text.lines().any(|l| l == "beep: 0"), "{text}");
    assert!(text.contains("  b: 1 calls, 0 messages"), "{text}");
    assert!(text.contains("  c: 1 calls, 1 messages"), "{text}");
    assert!(text.contains("no snapshot"), "{text}");
}

#[test]
fn report_shows_last_snapshot() {
    let dir = TempDir::new().unwrap();
    let scenario = write(&dir, "s.jsonl", SCENARIO);
    let kb = write(&dir, "kb.json", KB);
    let out = dir.path().join("log.jsonl");
    run(&["run", "--scenario", s(&scenario), "--kb", s(&kb), "--out", s(&out)]);
    let o = run(&["report", "--log", s(&out)]);
    let text = stdout(&o);
    assert!(text.contains("callback list (t=530000, request):"), "{text}");
    assert!(text.contains("1. pal message x1"), "{text}");
    assert!(text.contains("2. pal call x1"), "{text}");
}

#[test]
fn empty_log_reports_zeros() {
    let dir = TempDir::new().unwrap();
    let log = write(&dir, "log.jsonl", "");
    let o = run(&["report", "--log", s(&log)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "ring: 0"));
    assert!(text.lines().filter(|l| l.ends_with(": 0")).count() >= 12);
    assert!(text.contains("no snapshot"));
}

#[test]
fn malformed_log_is_invalid() {
    let dir = TempDir::new().unwrap();
    let log = write(&dir, "log.jsonl", "{\"t\":1,\"seq\":0,\"kind\":\"ring\"}\n");
    assert_eq!(run(&["report", "--log", s(&log)]).status.code(), Some(1));
}

#[test]
fn bundled_samples_run_cleanly() {
    let samples = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples");
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("log.jsonl");
    let o = run(&[
        "run",
        "--scenario",
        s(&samples.join("day.jsonl")),
        "--kb",
        s(&samples.join("kb.json")),
        "--config",
        s(&samples.join("config.json")),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "16 events, 18 alerts, 0 diagnostics");
    assert!(stderr(&o).is_empty(), "{}", stderr(&o));
}
