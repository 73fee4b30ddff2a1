use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sortcell_core::cellsim::{CameraId, RgbdFrame, TABLE_RGB};
use sortcell_core::ResponseLog;

fn sortcell(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sortcell"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SORTCELL_ENDPOINT")
        .output()
        .expect("binary runs")
}

fn repo(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel).to_string_lossy().into_owned()
}

fn fixture(name: &str) -> String {
    repo(&format!("crates/core/tests/fixtures/bench/{name}"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_documents_every_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &[&str])] = &[
        (&["--help"], &["--config", "cell", "segment", "baseline", "bench"]),
        (
            &["cell", "run", "--help"],
            &["--seed", "--scene", "--backend", "--endpoint", "--model", "--timeout-s", "--depth-mm", "--rgb", "--out", "--lenient-punctuation", "SORTCELL_ENDPOINT"],
        ),
        (&["cell", "render", "--help"], &["--camera", "--on-table", "--out"]),
        (&["baseline", "--help"], &["--frame", "--out"]),
        (&["segment", "--help"], &["--baseline", "--frame", "--depth-mm", "--rgb", "--out"]),
        (
            &["bench", "--help"],
            &["--manifest", "--backend", "--concurrency", "--report", "--ensemble", "--member-log", "--out", "--replay-log", "--profile"],
        ),
    ];
    for (args, flags) in cases {
        let o = sortcell(args, dir.path());
        assert!(o.status.success(), "{args:?}");
        let text = stdout(&o);
        for f in *flags {
            assert!(text.contains(f), "{args:?} help lacks {f}");
        }
    }
}

fn read_tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn cell_run_mixed_scene_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scene = repo("scenes/mixed12.json");
    for out in ["a", "b"] {
        let o = sortcell(&["cell", "run", "--seed", "42", "--backend", "mock", "--scene", &scene, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("12 items spawned, 12 sorted"));
    }
    let cycles = fs::read_to_string(dir.path().join("a/cycles.jsonl")).unwrap();
    assert_eq!(cycles.lines().count(), 12);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["final_state"], "shutdown");
    assert_eq!(summary["locations"]["bin:sock"], 3);
    assert!(dir.path().join("a/twin").read_dir().unwrap().count() > 0);
    assert_eq!(read_tree(&dir.path().join("a")), read_tree(&dir.path().join("b")));
}

#[test]
fn cell_run_empty_scene_makes_five_attempts() {
    let dir = tempfile::tempdir().unwrap();
    let o = sortcell(&["cell", "run", "--scene", &repo("scenes/empty.json"), "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let log = fs::read_to_string(dir.path().join("o/run_log.jsonl")).unwrap();
    let attempts = log
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|r| r["state"] == "find_candidate_a")
        .count();
    assert_eq!(attempts, 5);
    assert!(stdout(&o).contains("0 sorted"));
}

#[test]
fn cell_run_rejects_missing_scene_and_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = sortcell(&["cell", "run", "--scene", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.json"));
    let o = sortcell(&["cell", "run", "--backend", "live"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--endpoint"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.toml"),
        "seed = 7\nout = \"from-config\"\n[run.scene]\nsock = 2\n[run.thresholds]\ndepth_delta_mm = 5.0\nrgb_delta = 15\n",
    )
    .unwrap();
    let o = sortcell(&["--config", "cfg.toml", "cell", "run"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("2 items spawned, 2 sorted"));
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("from-config/summary.json")).unwrap()).unwrap();
    assert_eq!(s["seed"], 7);
    let o = sortcell(&["--config", "cfg.toml", "cell", "run", "--seed", "8", "--out", "flag"], dir.path());
    assert!(o.status.success());
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("flag/summary.json")).unwrap()).unwrap();
    assert_eq!(s["seed"], 8);

    fs::write(dir.path().join("bad.toml"), "sed = 1\n").unwrap();
    assert_eq!(sortcell(&["--config", "bad.toml", "cell", "run"], dir.path()).status.code(), Some(1));
}

#[test]
fn segment_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let scene = repo("scenes/mixed12.json");
    let d = dir.path();
    for (stem, on_table) in [("bare", "0"), ("one", "1")] {
        let o = sortcell(&["cell", "render", "--seed", "3", "--scene", &scene, "--on-table", on_table, "--out", stem], d);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert!(sortcell(&["baseline", "--frame", "bare", "--out", "base"], d).status.success());

    let o = sortcell(&["segment", "--baseline", "base", "--frame", "bare", "--frame", "one", "--out", "p1"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("bare: 0 points"));
    assert!(fs::read_to_string(d.join("p1/bare.ply")).unwrap().contains("element vertex 0\n"));
    let with_one = fs::read_to_string(d.join("p1/one.ply")).unwrap();
    assert!(!with_one.contains("element vertex 0\n"));

    let o = sortcell(
        &["segment", "--baseline", "base", "--frame", "one", "--depth-mm", "5", "--rgb", "15", "--out", "p2"],
        d,
    );
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(d.join("p2/one.ply")).unwrap(), with_one);

    let o = sortcell(&["segment", "--baseline", "nowhere", "--frame", "one", "--out", "p3"], d);
    assert_eq!(o.status.code(), Some(1));

    RgbdFrame::filled(CameraId::Cam2, 32, 24, TABLE_RGB, 800).save(&d.join("small")).unwrap();
    let o = sortcell(&["segment", "--baseline", "base", "--frame", "small", "--out", "p4"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("expected 640x480"));
}

#[test]
fn bench_replay_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let log = fixture("log10_a.jsonl");
    let o = sortcell(
        &["bench", "--manifest", &fixture("manifest10.jsonl"), "--backend", "replay", "--replay-log", &log, "--concurrency", "3", "--report", "--out", "r"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(dir.path().join("r/responses.jsonl")).unwrap(), fs::read(&log).unwrap());
    let md = fs::read_to_string(dir.path().join("r/report.md")).unwrap();
    assert!(md.contains("| a | 50.00% | 50.00% | 66.67% | 0.00% | 0.00% | 50.00% | 100.00% |"), "{md}");
    for f in ["table1.csv", "table2.csv", "audit.json", "confusion_a.csv", "confusion_a.svg"] {
        assert!(dir.path().join("r").join(f).exists(), "{f}");
    }
}

#[test]
fn bench_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture("manifest10.jsonl");
    let member = fixture("log10_b.jsonl");
    let o = sortcell(&["bench", "--manifest", &manifest, "--ensemble", "b=1.0", "--member-log", &member, "--out", "e"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let voted = ResponseLog::load(&dir.path().join("e/ensemble.jsonl")).unwrap();
    let original = ResponseLog::load(Path::new(&member)).unwrap();
    for (v, m) in voted.records.iter().zip(&original.records) {
        let want = if m.parsed.is_valid() { m.parsed.to_string() } else { "invalid(not_a_class)".into() };
        assert_eq!(v.parsed.to_string(), want);
    }

    let o = sortcell(&["bench", "--manifest", &manifest, "--ensemble", "b=heavy", "--member-log", &member], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("usage: --ensemble"));
    let o = sortcell(&["bench", "--manifest", &manifest, "--ensemble", "b=1,z=1", "--member-log", &member], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("'z'"));
}

#[test]
fn bench_unreachable_endpoint_fails_after_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut manifest = String::new();
    for i in 0..3 {
        fs::write(d.join(format!("i{i}.png")), b"\x89PNG\r\n\x1a\nnot really").unwrap();
        manifest.push_str(&format!("{{\"id\":\"i{i}\",\"image\":\"i{i}.png\",\"label\":\"sock\"}}\n"));
    }
    fs::write(d.join("m.jsonl"), manifest).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sortcell"))
        .args(["bench", "--manifest", "m.jsonl", "--backend", "live", "--model", "gemma3:12b", "--timeout-s", "2", "--out", "live"])
        .current_dir(d)
        .env("SORTCELL_ENDPOINT", "http://127.0.0.1:9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("i0:") && err.contains("i2:"), "{err}");
    assert!(err.contains("3 of 3 requests failed"), "{err}");
    let log = ResponseLog::load(&d.join("live/responses.jsonl")).unwrap();
    assert!(log.records.iter().all(|r| r.parsed.to_string() == "invalid(transport)"));
}

#[test]
fn bench_rejects_bad_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.jsonl"), "{\"id\":\"a\",\"image\":\"a.png\",\"label\":\"socks\"}\n").unwrap();
    let o = sortcell(&["bench", "--manifest", "m.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"));
}
