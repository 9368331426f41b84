//! CLI surface tests: subcommands, exit codes, output files.

use std::path::Path;
use std::process::Command;

use fdbench::fdata::{synth, write_ucr_tsv};

fn fdbench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fdbench"))
}

fn write_dataset(dir: &Path) -> std::path::PathBuf {
    let task = synth::two_class_frequency(20, 16, 3).unwrap();
    let path = dir.join("freq.tsv");
    write_ucr_tsv(&task, &path).unwrap();
    path
}

#[test]
fn validate_reports_and_exits_by_status() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let good = dir.path().join("good.toml");
    std::fs::write(
        &good,
        format!(
            r#"output_dir = {:?}

[[datasets]]
name = "freq"
path = {:?}
split_fraction = 0.5

[[pipelines]]
id = "knn"
extractors = "raw"
learner = {{ method = "knn", k = 1 }}
"#,
            dir.path().join("out"),
            data
        ),
    )
    .unwrap();
    let out = fdbench()
        .args(["validate", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("20 obs"), "{stdout}");

    // config error: malformed learner method -> exit code 1
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        std::fs::read_to_string(&good)
            .unwrap()
            .replace("method = \"knn\"", "method = \"nonsense\""),
    )
    .unwrap();
    let out = fdbench()
        .args(["validate", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );

    // unreadable dataset is a validation problem -> exit code 1
    let missing = dir.path().join("missing.toml");
    std::fs::write(
        &missing,
        std::fs::read_to_string(&good)
            .unwrap()
            .replace(&format!("{data:?}"), "\"/nonexistent/data.tsv\""),
    )
    .unwrap();
    let out = fdbench()
        .args(["validate", "--config"])
        .arg(&missing)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_exits_two_on_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let config = dir.path().join("partial.toml");
    std::fs::write(
        &config,
        format!(
            r#"output_dir = {:?}

[[datasets]]
name = "freq"
path = {:?}
split_fraction = 0.5
n_splits = 2

[[datasets]]
name = "missing"
path = "/nonexistent/file.tsv"
split_fraction = 0.5
n_splits = 2

[[pipelines]]
id = "knn"
extractors = "raw"
learner = {{ method = "knn", k = 1 }}
"#,
            dir.path().join("out"),
            data
        ),
    )
    .unwrap();
    let out = fdbench()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // the readable dataset still produced records and aggregates
    let records = std::fs::read_to_string(dir.path().join("out/records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 2);
    assert!(dir.path().join("out/aggregates.json").exists());
    assert!(dir.path().join("out/records_long.csv").exists());
}

#[test]
fn rank_prints_pipeline_table() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let config = dir.path().join("rank.toml");
    std::fs::write(
        &config,
        format!(
            r#"output_dir = {:?}

[[datasets]]
name = "freq"
path = {:?}
split_fraction = 0.5
n_splits = 3

[[pipelines]]
id = "knn_raw"
extractors = "raw"
learner = {{ method = "knn", k = 1 }}

[[pipelines]]
id = "tree_tsfeat"
learner = {{ method = "tree" }}

[pipelines.extractors.series]
method = "tsfeat"
"#,
            dir.path().join("out"),
            data
        ),
    )
    .unwrap();
    let out = fdbench()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = fdbench()
        .args(["rank", "--results"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("knn_raw"), "{stdout}");
    assert!(stdout.contains("tree_tsfeat"), "{stdout}");
    assert!(stdout.contains("avg rank"), "{stdout}");
}

#[test]
fn extract_writes_feature_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_dataset(dir.path());
    let out_path = dir.path().join("features.csv");
    let out = fdbench()
        .args(["extract", "--dataset"])
        .arg(&data)
        .args([
            "--method",
            "multires",
            "--params",
            "res_level=2,shift=1.0",
            "--out",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let content = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = content.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("label,mr0.0,"), "{header}");
    assert_eq!(content.lines().count(), 1 + 20);

    // unknown method -> config error, exit 1
    let out = fdbench()
        .args(["extract", "--dataset"])
        .arg(&data)
        .args(["--method", "nope", "--out"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
