//! Result aggregation: per-pair mean accuracies, average ranks with the
//! average-tie convention, and percent-of-max accuracy.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bench::Record;

/// Mean accuracy (and mmce/seconds) per (dataset, pipeline) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub dataset: String,
    pub pipeline: String,
    pub n_splits: usize,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub mean_mmce: f64,
    pub sd_mmce: f64,
    pub mean_seconds: f64,
    pub percent_of_max: f64,
}

pub fn summarize_pairs(records: &[Record]) -> Vec<PairSummary> {
    let mut groups: BTreeMap<(String, String), Vec<&Record>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.dataset.clone(), r.pipeline.clone()))
            .or_default()
            .push(r);
    }
    let mut out = Vec::with_capacity(groups.len());
    for ((dataset, pipeline), rows) in groups {
        let n = rows.len() as f64;
        let mean = |f: &dyn Fn(&Record) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
        let mean_accuracy = mean(&|r| r.accuracy);
        let mean_mmce = mean(&|r| r.mmce);
        let sd = |vals: Vec<f64>, m: f64| {
            if vals.len() > 1 {
                (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            }
        };
        out.push(PairSummary {
            dataset,
            pipeline,
            n_splits: rows.len(),
            mean_accuracy,
            sd_accuracy: sd(rows.iter().map(|r| r.accuracy).collect(), mean_accuracy),
            mean_mmce,
            sd_mmce: sd(rows.iter().map(|r| r.mmce).collect(), mean_mmce),
            mean_seconds: mean(&|r| r.seconds),
            percent_of_max: f64::NAN, // filled by percent_of_max
        });
    }
    fill_percent_of_max(&mut out);
    out
}

/// accuracy / best accuracy on the dataset; a zero maximum yields 0 with a
/// warning.
fn fill_percent_of_max(pairs: &mut [PairSummary]) {
    let mut max_by_dataset: BTreeMap<&str, f64> = BTreeMap::new();
    for p in pairs.iter() {
        let e = max_by_dataset
            .entry(&p.dataset)
            .or_insert(f64::NEG_INFINITY);
        *e = e.max(p.mean_accuracy);
    }
    let maxes: BTreeMap<String, f64> = max_by_dataset
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    for p in pairs.iter_mut() {
        let max = maxes[&p.dataset];
        p.percent_of_max = if max > 0.0 {
            p.mean_accuracy / max
        } else {
            log::warn!(
                "dataset `{}` has maximum accuracy 0; percent-of-max defined as 0",
                p.dataset
            );
            0.0
        };
    }
}

/// Per-dataset ranks (rank 1 = best mean accuracy, ties get the average of
/// the tied positions) and the across-dataset average per pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankTable {
    /// dataset -> (pipeline -> rank)
    pub per_dataset: BTreeMap<String, BTreeMap<String, f64>>,
    /// pipeline -> mean rank across ranked datasets, best first.
    pub average: Vec<(String, f64)>,
    /// Pipelines left out because they miss results on some dataset.
    pub excluded: Vec<String>,
}

pub fn aggregate_ranks(pairs: &[PairSummary]) -> RankTable {
    let datasets: BTreeSet<&str> = pairs.iter().map(|p| p.dataset.as_str()).collect();
    let mut coverage: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for p in pairs {
        coverage
            .entry(p.pipeline.as_str())
            .or_default()
            .insert(p.dataset.as_str());
    }
    let mut ranked: Vec<&str> = Vec::new();
    let mut excluded = Vec::new();
    for (pipeline, cover) in &coverage {
        if cover.len() == datasets.len() {
            ranked.push(pipeline);
        } else {
            log::warn!(
                "pipeline `{pipeline}` lacks results on {} of {} datasets; excluded from ranking",
                datasets.len() - cover.len(),
                datasets.len()
            );
            excluded.push(pipeline.to_string());
        }
    }

    let mut per_dataset: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for &ds in &datasets {
        let mut scored: Vec<(&str, f64)> = pairs
            .iter()
            .filter(|p| p.dataset == ds && ranked.contains(&p.pipeline.as_str()))
            .map(|p| (p.pipeline.as_str(), p.mean_accuracy))
            .collect();
        // descending accuracy; ties share the average of their positions
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
        let mut ranks: BTreeMap<String, f64> = BTreeMap::new();
        let mut i = 0;
        while i < scored.len() {
            let mut j = i;
            while j + 1 < scored.len() && scored[j + 1].1 == scored[i].1 {
                j += 1;
            }
            // positions are 1-based: i+1 ..= j+1
            let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
            for k in i..=j {
                ranks.insert(scored[k].0.to_string(), avg_rank);
            }
            i = j + 1;
        }
        per_dataset.insert(ds.to_string(), ranks);
    }

    let mut average: Vec<(String, f64)> = ranked
        .iter()
        .map(|&p| {
            let sum: f64 = per_dataset.values().map(|m| m[p]).sum();
            (p.to_string(), sum / per_dataset.len() as f64)
        })
        .collect();
    average.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    RankTable {
        per_dataset,
        average,
        excluded,
    }
}
