//! Benchmark harness: declarative configs expand into (dataset, pipeline)
//! jobs sharing per-dataset split plans, with incremental persistence,
//! resume, and rank / percent-of-max aggregation.

pub mod agg;
pub mod config;
pub mod export;
pub mod run;

pub use agg::{aggregate_ranks, summarize_pairs, PairSummary, RankTable};
pub use config::{BenchmarkConfig, DatasetConfig, PipelineConfig};
pub use export::{read_records, AggregatesDoc, FailedJob};
pub use run::{export_aggregates, run_benchmark, RunReport, RunStatus};

use serde::{Deserialize, Serialize};

/// One per-split result row, as persisted in records.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub dataset: String,
    pub pipeline: String,
    pub split: usize,
    pub mmce: f64,
    pub accuracy: f64,
    pub seconds: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdata::{synth, write_ucr_tsv};
    use std::path::Path;

    fn write_config(
        dir: &Path,
        datasets: &[(&str, &str, f64, usize)],
        extra: &str,
    ) -> std::path::PathBuf {
        let mut text = format!(
            "seed = 42\nworkers = 2\noutput_dir = {:?}\n",
            dir.join("out")
        );
        for (name, path, fraction, n_splits) in datasets {
            text.push_str(&format!(
                "\n[[datasets]]\nname = {name:?}\npath = {path:?}\nsplit_fraction = {fraction}\nn_splits = {n_splits}\n"
            ));
        }
        text.push_str(extra);
        let path = dir.join("bench.toml");
        std::fs::write(&path, text).unwrap();
        path
    }

    const TWO_PIPELINES: &str = r#"
[[pipelines]]
id = "knn_raw"
extractors = "raw"
learner = { method = "knn", k = 1 }

[[pipelines]]
id = "tree_tsfeat"
learner = { method = "tree" }

[pipelines.extractors.series]
method = "tsfeat"

[[pipelines]]
id = "forest_multires"
learner = { method = "forest", n_trees = 10 }

[pipelines.extractors.series]
method = "multires"
res_level = 2
"#;

    fn make_datasets(dir: &Path) -> Vec<(String, String)> {
        let t1 = synth::two_class_frequency(24, 16, 1).unwrap();
        let t2 = synth::two_class_power(30, 2).unwrap();
        let p1 = dir.join("freq.tsv");
        let p2 = dir.join("power.tsv");
        write_ucr_tsv(&t1, &p1).unwrap();
        write_ucr_tsv(&t2, &p2).unwrap();
        vec![
            ("freq".to_string(), p1.display().to_string()),
            ("power".to_string(), p2.display().to_string()),
        ]
    }

    #[test]
    fn job_expansion_cardinality() {
        let dir = tempfile::tempdir().unwrap();
        let ds = make_datasets(dir.path());
        let config_path = write_config(
            dir.path(),
            &[(&ds[0].0, &ds[0].1, 0.5, 20), (&ds[1].0, &ds[1].1, 0.5, 20)],
            TWO_PIPELINES,
        );
        let config = BenchmarkConfig::from_path(&config_path).unwrap();
        let report = run_benchmark(&config, false).unwrap();
        assert_eq!(report.status, RunStatus::Ok);
        // 2 datasets x 3 pipelines x 20 splits
        assert_eq!(report.records.len(), 120);
        assert_eq!(report.evaluated_jobs, 6);
        export_aggregates(&config, &report).unwrap();
        assert!(config.output_dir.join("aggregates.json").exists());
    }

    #[test]
    fn resume_skips_completed_jobs() {
        let dir = tempfile::tempdir().unwrap();
        let ds = make_datasets(dir.path());
        let config_path = write_config(dir.path(), &[(&ds[0].0, &ds[0].1, 0.5, 5)], TWO_PIPELINES);
        let config = BenchmarkConfig::from_path(&config_path).unwrap();
        let first = run_benchmark(&config, false).unwrap();
        assert_eq!(first.evaluated_jobs, 3);
        let second = run_benchmark(&config, true).unwrap();
        assert_eq!(second.evaluated_jobs, 0, "resume re-ran jobs");
        assert_eq!(second.skipped_jobs, 3);
        assert_eq!(second.records, first.records);
    }

    #[test]
    fn reruns_are_deterministic_apart_from_wall_clock() {
        let dir = tempfile::tempdir().unwrap();
        let ds = make_datasets(dir.path());
        let config_path = write_config(dir.path(), &[(&ds[0].0, &ds[0].1, 0.5, 6)], TWO_PIPELINES);
        let config = BenchmarkConfig::from_path(&config_path).unwrap();
        let a = run_benchmark(&config, false).unwrap();
        let b = run_benchmark(&config, false).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(
                (&x.dataset, &x.pipeline, x.split),
                (&y.dataset, &y.pipeline, y.split)
            );
            assert_eq!(x.mmce, y.mmce);
            assert_eq!(x.accuracy, y.accuracy);
        }
        assert_eq!(a.split_fingerprints, b.split_fingerprints);
    }

    #[test]
    fn all_pipelines_share_one_split_plan_per_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let ds = make_datasets(dir.path());
        let config_path = write_config(dir.path(), &[(&ds[0].0, &ds[0].1, 0.5, 4)], TWO_PIPELINES);
        let config = BenchmarkConfig::from_path(&config_path).unwrap();
        let report = run_benchmark(&config, false).unwrap();
        // one fingerprint per dataset; every pipeline's records reference
        // split ids 0..n_splits of that single plan
        assert_eq!(report.split_fingerprints.len(), 1);
        for pid in ["knn_raw", "tree_tsfeat", "forest_multires"] {
            let splits: Vec<usize> = report
                .records
                .iter()
                .filter(|r| r.pipeline == pid)
                .map(|r| r.split)
                .collect();
            assert_eq!(splits, (0..4).collect::<Vec<_>>(), "{pid}");
        }
    }

    #[test]
    fn unreadable_dataset_skips_jobs_with_reason() {
        let dir = tempfile::tempdir().unwrap();
        let ds = make_datasets(dir.path());
        let config_path = write_config(
            dir.path(),
            &[
                (&ds[0].0, &ds[0].1, 0.5, 3),
                ("missing", "/nonexistent/file.tsv", 0.5, 3),
            ],
            TWO_PIPELINES,
        );
        let config = BenchmarkConfig::from_path(&config_path).unwrap();
        let report = run_benchmark(&config, false).unwrap();
        assert_eq!(report.status, RunStatus::PartialFailure);
        assert_eq!(report.failed_jobs.len(), 3);
        assert!(report.failed_jobs.iter().all(|f| f.dataset == "missing"));
        // the readable dataset still ran
        assert_eq!(report.records.len(), 9);
    }

    #[test]
    fn tuned_pipeline_runs_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let ds = make_datasets(dir.path());
        let tuned = r#"
[[pipelines]]
id = "knn_tuned"
extractors = "raw"
learner = { method = "knn", k = 1 }
tuned = true
budget = 3
strategy = "random"

[[pipelines.space_entries]]
id = "k"
type = "int"
lo = 1
hi = 5
"#;
        let config_path = write_config(dir.path(), &[(&ds[0].0, &ds[0].1, 0.5, 2)], tuned);
        let config = BenchmarkConfig::from_path(&config_path).unwrap();
        let report = run_benchmark(&config, false).unwrap();
        assert_eq!(report.status, RunStatus::Ok);
        assert_eq!(report.records.len(), 2);
    }
}
