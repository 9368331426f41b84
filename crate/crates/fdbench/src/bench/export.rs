//! Result persistence: the per-split records CSV, the aggregates JSON and a
//! plot-ready long-format CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::agg::{PairSummary, RankTable};
use crate::bench::Record;
use crate::error::{Error, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const AGGREGATES_FILE: &str = "aggregates.json";
pub const LONG_FILE: &str = "records_long.csv";

pub const RECORDS_HEADER: [&str; 6] = [
    "dataset", "pipeline", "split", "mmce", "accuracy", "seconds",
];

/// Append records to the CSV, writing the header when the file is new.
/// One job's records are flushed in a single call, so any file prefix holds
/// complete jobs only.
pub fn append_records(path: &Path, records: &[Record]) -> Result<()> {
    let new_file = !path.exists();
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    if new_file {
        w.write_record(RECORDS_HEADER)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    }
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?);
    }
    Ok(out)
}

/// Everything the aggregates JSON carries.
#[derive(Debug, Serialize, Deserialize)]
pub struct AggregatesDoc {
    pub version: String,
    pub seed: u64,
    pub config_echo: toml::Value,
    pub pairs: Vec<PairSummary>,
    pub ranks: RankTable,
    /// dataset -> fingerprint of the shared outer split plan.
    pub split_fingerprints: std::collections::BTreeMap<String, String>,
    pub failed_jobs: Vec<FailedJob>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailedJob {
    pub dataset: String,
    pub pipeline: String,
    pub reason: String,
}

pub fn write_aggregates(path: &Path, doc: &AggregatesDoc) -> Result<()> {
    let json =
        serde_json::to_string_pretty(doc).map_err(|e| Error::Format(format!("aggregates: {e}")))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Long format for plotting: one row per (record, measure).
pub fn write_long_csv(path: &Path, records: &[Record]) -> Result<()> {
    let mut out = String::from("dataset,pipeline,split,measure,value\n");
    for r in records {
        for (measure, value) in [
            ("mmce", r.mmce),
            ("accuracy", r.accuracy),
            ("seconds", r.seconds),
        ] {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.dataset, r.pipeline, r.split, measure, value
            ));
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Export a feature block with its labels (first column) to CSV.
pub fn write_feature_csv(
    path: &Path,
    label_name: &str,
    labels: &[String],
    names: &[String],
    values: &ndarray::Array2<f64>,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(label_name);
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (i, row) in values.rows().into_iter().enumerate() {
        out.push_str(&labels[i]);
        for v in row.iter() {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
