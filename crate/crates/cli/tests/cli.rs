use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lectureseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lectureseg")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, frames: &str) -> String {
    let out = lectureseg(&["synth", "--frames", frames, "--seed", "5", "--out", path(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("manifest.tsv").to_str().unwrap().to_string()
}

#[test]
fn classify_prints_one_row_per_frame() {
    let dir = TempDir::new().unwrap();
    let manifest = synth(dir.path(), "6");
    let out = lectureseg(&["classify", "--manifest", &manifest]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "frame_id\ttimestamp_ms\tmedia_type\trule");
    assert_eq!(lines.len(), 7);
    for (i, l) in lines[1..].iter().enumerate() {
        let cols: Vec<&str> = l.split('\t').collect();
        assert_eq!(cols.len(), 4);
        assert_eq!(cols[0], i.to_string());
        assert!(["board", "sheet", "podium"].contains(&cols[2]), "{l}");
    }
}

#[test]
fn unreadable_frames_are_reported_not_fatal() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("bad.png"), b"junk").unwrap();
    let m = dir.path().join("m.tsv");
    std::fs::write(&m, "0\t0\tbad.png\n").unwrap();
    let out = lectureseg(&["classify", "--manifest", path(&m)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("0\t0\terror\t"));
}

#[test]
fn index_writes_json_and_thumbnails() {
    let dir = TempDir::new().unwrap();
    let manifest = synth(&dir.path().join("data"), "5");
    let out_json = dir.path().join("out/index.json");
    let thumbs = dir.path().join("out/thumbs");
    std::fs::create_dir_all(dir.path().join("out")).unwrap();
    let trace = dir.path().join("trace");
    let out = lectureseg(&[
        "index",
        "--manifest",
        &manifest,
        "--out",
        path(&out_json),
        "--thumbs",
        path(&thumbs),
        "--dump-trace",
        path(&trace),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let idx = lectureseg::read_index(&out_json).unwrap();
    assert_eq!(idx.frames.len(), 5);
    for f in &idx.frames {
        let rel = f.thumbnail_path.as_ref().unwrap();
        assert!(rel.starts_with("thumbs/"), "{rel}");
        assert!(dir.path().join("out").join(rel).is_file());
    }
    assert!(std::fs::read_dir(&trace).unwrap().next().is_some());
}

#[test]
fn bench_emits_json_report() {
    let out = lectureseg(&["bench", "--frames", "50", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["frames"], 50);
    assert_eq!(v["trials"], 10);
    assert!(String::from_utf8(out.stderr).unwrap().contains("closed_form"));

    let dir = TempDir::new().unwrap();
    let json = dir.path().join("r.json");
    let out = lectureseg(&["bench", "--frames", "30", "--trials", "3", "--out", path(&json)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("closed_form"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["frames"], 30);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("none.tsv");
    assert_eq!(lectureseg(&["classify", "--manifest", path(&missing)]).status.code(), Some(1));

    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "0\t0\ta.png\n0\t5\tb.png\n").unwrap();
    let out = lectureseg(&["classify", "--manifest", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));

    let cfg = dir.path().join("c.conf");
    std::fs::write(&cfg, "no equals sign here\n").unwrap();
    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let out = lectureseg(&["classify", "--manifest", path(&empty), "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(lectureseg(&["bench", "--p-exact", "0.9", "--p-prev", "0.2", "--p-new", "0.1"]).status.code(), Some(1));
    assert_eq!(lectureseg(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lectureseg(&["index", "--manifest", path(&empty)]).status.code(), Some(1));
    assert_eq!(lectureseg(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.tsv");
    std::fs::write(&empty, "").unwrap();
    let blocker = dir.path().join("index.json");
    std::fs::create_dir(&blocker).unwrap();
    std::fs::write(blocker.join("x"), "x").unwrap();
    let thumbs = dir.path().join("thumbs");
    let out = lectureseg(&["index", "--manifest", path(&empty), "--out", path(&blocker), "--thumbs", path(&thumbs)]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
