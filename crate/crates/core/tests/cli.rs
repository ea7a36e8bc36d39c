use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn tweetscope(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tweetscope"))
        .args(args)
        .arg("--config")
        .arg(fixture("run.conf"))
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> Vec<Value> {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn paths(entries: &[Value]) -> Vec<String> {
    entries
        .iter()
        .map(|e| e["path"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn full_run_matches_golden_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = tweetscope(&["run-all"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let golden: Vec<Value> =
        serde_json::from_str(&fs::read_to_string(fixture("golden_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest(dir.path()), golden);

    for expected in [
        "fear_curve.csv",
        "state_sentiment.csv",
        "ngrams.csv",
        "wordcloud.csv",
        "source_summary.csv",
        "source_ratios.csv",
        "freq_mentions.csv",
        "nb_model.json",
        "lr_model.json",
        "evaluation.csv",
    ] {
        assert!(dir.path().join(expected).is_file(), "{expected} missing");
    }
    // Every manifest hash describes the file on disk.
    for entry in manifest(dir.path()) {
        let bytes = fs::read(dir.path().join(entry["path"].as_str().unwrap())).unwrap();
        assert_eq!(entry["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn ingest_stage_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = tweetscope(&["run-all", "--stages", "ingest"], dir.path());
    assert!(out.status.success());
    let entries = manifest(dir.path());
    assert_eq!(paths(&entries), vec!["corpus.jsonl"]);
    assert_eq!(entries[0]["rows"], 200);
    assert_eq!(entries[0]["stage"], "ingest");
    let mut files: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, vec!["corpus.jsonl", "manifest.json"]);
}

#[test]
fn bad_lexicon_path_is_a_config_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = tweetscope(&["run-all", "--lexicon", "/definitely/not/here.tsv"], &out_dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn malformed_lexicon_is_a_data_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = dir.path().join("bad.tsv");
    fs::write(&lexicon, "good\tpositive\t1\nbad\tnegative\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = tweetscope(&["run-all", "--lexicon", lexicon.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert!(!out_dir.exists());
}

#[test]
fn invalid_buckets_and_unknown_stage_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = tweetscope(&["run-all", "--buckets", "120,77"], &dir.path().join("a"));
    assert_eq!(out.status.code(), Some(2));
    let out = tweetscope(&["run-all", "--stages", "ingest,report"], &dir.path().join("b"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_stage_keeps_completed_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = tweetscope(&["run-all", "--test-size", "400"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let names = paths(&manifest(dir.path()));
    for done in ["corpus.jsonl", "cleaned.jsonl", "scored.jsonl", "fear_curve.csv"] {
        assert!(names.contains(&done.to_string()), "{done} missing from {names:?}");
    }
    assert!(!names.contains(&"evaluation.csv".to_string()));
}

#[test]
fn subcommands_rerun_single_stages() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["ingest", "clean", "sentiment", "geomap"] {
        let out = tweetscope(&[cmd], dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let names = paths(&manifest(dir.path()));
    assert_eq!(
        names,
        vec!["corpus.jsonl", "cleaned.jsonl", "scored.jsonl", "state_sentiment.csv"]
    );

    // Classification only reads the scored intermediate file.
    fs::remove_file(dir.path().join("corpus.jsonl")).unwrap();
    fs::remove_file(dir.path().join("cleaned.jsonl")).unwrap();
    for cmd in ["train-nb", "train-lr", "evaluate"] {
        let out = tweetscope(&[cmd], dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let model: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("nb_model.json")).unwrap()).unwrap();
    assert_eq!(model["format"], "tweetscope-nb");
    let csv = fs::read_to_string(dir.path().join("evaluation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn seed_flag_changes_masks() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(tweetscope(&["run-all", "--stages", "ingest,clean"], &a)
        .status
        .success());
    assert!(tweetscope(&["run-all", "--stages", "ingest,clean", "--seed", "7"], &b)
        .status
        .success());
    assert_eq!(
        fs::read(a.join("corpus.jsonl")).unwrap(),
        fs::read(b.join("corpus.jsonl")).unwrap()
    );
    assert_ne!(
        fs::read(a.join("cleaned.jsonl")).unwrap(),
        fs::read(b.join("cleaned.jsonl")).unwrap()
    );
}

#[test]
fn help_documents_core_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_tweetscope"))
        .args(["run-all", "--help"])
        .output()
        .unwrap();
    let help = String::from_utf8_lossy(&out.stdout);
    for flag in ["--seed", "--out", "--stages", "--config"] {
        assert!(help.contains(flag), "{flag} not documented");
    }
}
