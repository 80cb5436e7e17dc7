mod common;

use common::{bin, run, s, snapshot, write_corpus};

#[test]
fn single_record_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(&dir.path().join("corpus"), 14);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["gen", "--manifest", s(&manifest), "--out", s(out), "--seed", "7", "--count", "1"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(a.join("images/000000.png").exists());
    assert!(a.join("labels.json").exists());
    assert_eq!(snapshot(&a), snapshot(&b));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(&dir.path().join("corpus"), 14);
    let mut snaps = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        let o = run(&[
            "gen", "--manifest", s(&manifest), "--out", s(&out), "--count", "10", "--mode", "mixed", "--mix-ratio", "0.5",
            "--workers", workers, "--write-masks",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        snaps.push(snapshot(&out));
    }
    assert_eq!(snaps[0], snaps[1]);
}

#[test]
fn seed_env_is_overridden_by_flag() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(&dir.path().join("corpus"), 14);
    let gen = |name: &str, env: Option<&str>, flag: Option<&str>| {
        let out = dir.path().join(name);
        let mut c = bin();
        c.args(["gen", "--manifest", s(&manifest), "--out", s(&out), "--count", "4"]);
        if let Some(e) = env {
            c.env("PARKAUG_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        assert!(c.output().unwrap().status.success());
        snapshot(&out)
    };
    let by_flag = gen("flag", None, Some("21"));
    assert_eq!(gen("env", Some("21"), None), by_flag);
    assert_eq!(gen("both", Some("99"), Some("21")), by_flag);
    assert_ne!(gen("other", Some("99"), None), by_flag);
}

#[test]
fn summary_and_structured_events() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(&dir.path().join("corpus"), 14);
    let out = dir.path().join("out");
    let o = run(&["gen", "--manifest", s(&manifest), "--out", s(&out), "--count", "6", "--mode", "pda"]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("records 6"), "{stdout}");
    let events: Vec<serde_json::Value> = String::from_utf8_lossy(&o.stderr)
        .lines()
        .map(|l| serde_json::from_str(l).expect("every stderr line is a JSON event"))
        .collect();
    assert_eq!(events.first().unwrap()["event"], "start");
    let summary = events.iter().find(|e| e["event"] == "summary").unwrap();
    assert_eq!(summary["attempted"], 6);
}

#[test]
fn missing_manifest_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen", "--manifest", s(&dir.path().join("nope.json")), "--out", s(dir.path()), "--count", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_parameters_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(&dir.path().join("corpus"), 14);
    let out = dir.path().join("out");
    for extra in [&["--count", "0"][..], &["--count", "1", "--mix-ratio", "1.5"], &["--count", "1", "--workers", "0"]] {
        let mut args = vec!["gen", "--manifest", s(&manifest), "--out", s(&out)];
        args.extend_from_slice(extra);
        assert_eq!(run(&args).status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn zero_successes_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // assets far wider than any car once scaled to the car's height
    let manifest = write_corpus(&dir.path().join("corpus"), 400);
    let out = dir.path().join("out");
    let o = run(&["gen", "--manifest", s(&manifest), "--out", s(&out), "--count", "3", "--mode", "oda"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.matches("\"record_failed\"").count(), 3);
}
