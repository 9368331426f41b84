//! Resampled evaluation: MMCE, plain resampling over a split plan, and
//! nested resampling (tune on outer-train only, refit, evaluate on
//! outer-test). Splits are independent; failures are recorded per split and
//! the aggregate covers the completed ones.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdata::{ClassId, SplitIndex, Task};
use crate::params::ParamMap;
use crate::pipeline::space::ParamSpace;
use crate::pipeline::tune::{tune, TuneStrategy};
use crate::pipeline::Pipeline;
use crate::seeds::derive_seed;
use crate::trace::Tracer;

/// Performance measures recorded per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Mmce,
    Accuracy,
    TrainTimeSeconds,
}

/// Mean misclassification error: count(truth != pred) / n.
pub fn mmce(truth: &[ClassId], pred: &[ClassId]) -> Result<f64> {
    if truth.len() != pred.len() {
        return Err(Error::Shape(format!(
            "mmce: {} truth labels vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Shape("mmce of empty prediction set".into()));
    }
    let wrong = truth.iter().zip(pred).filter(|(t, p)| t != p).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// accuracy = 1 - mmce, exactly.
pub fn accuracy(truth: &[ClassId], pred: &[ClassId]) -> Result<f64> {
    Ok(1.0 - mmce(truth, pred)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitRecord {
    pub split_id: usize,
    pub mmce: f64,
    pub accuracy: f64,
    /// Extractor + learner fitting (includes the extractor transform).
    pub fit_seconds: f64,
    pub predict_seconds: f64,
    pub tune_seconds: f64,
    /// Parameters chosen by nested tuning, when any.
    pub chosen_params: Option<ParamMap>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitFailure {
    pub split_id: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_completed: usize,
    pub n_failed: usize,
    pub mean_mmce: f64,
    pub sd_mmce: f64,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResampleResult {
    pub per_split: Vec<SplitRecord>,
    pub failures: Vec<SplitFailure>,
    pub aggregate: Aggregate,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Recompute the aggregate block from the per-split records.
pub fn aggregate_of(per_split: &[SplitRecord], n_failed: usize) -> Aggregate {
    let mmces: Vec<f64> = per_split.iter().map(|r| r.mmce).collect();
    let accs: Vec<f64> = per_split.iter().map(|r| r.accuracy).collect();
    let secs: Vec<f64> = per_split
        .iter()
        .map(|r| r.fit_seconds + r.predict_seconds + r.tune_seconds)
        .collect();
    let (mean_mmce, sd_mmce) = mean_sd(&mmces);
    let (mean_accuracy, sd_accuracy) = mean_sd(&accs);
    let (mean_seconds, _) = mean_sd(&secs);
    Aggregate {
        n_completed: per_split.len(),
        n_failed,
        mean_mmce,
        sd_mmce,
        mean_accuracy,
        sd_accuracy,
        mean_seconds,
    }
}

fn run_split(
    pipeline: &Pipeline,
    task: &Task,
    split: &SplitIndex,
    split_id: usize,
    seed: u64,
    tracer: Option<&Tracer>,
) -> Result<SplitRecord> {
    let labels = task.class_labels()?;
    let (preds, timings) = pipeline.fit_predict_timed(
        task,
        split.train(),
        split.test(),
        derive_seed(seed, split_id as u64),
        tracer,
    )?;
    let truth: Vec<ClassId> = split.test().iter().map(|&i| labels[i]).collect();
    let loss = mmce(&truth, &preds)?;
    Ok(SplitRecord {
        split_id,
        mmce: loss,
        accuracy: 1.0 - loss,
        fit_seconds: timings.fit_seconds,
        predict_seconds: timings.predict_seconds,
        tune_seconds: 0.0,
        chosen_params: None,
    })
}

/// Fit and evaluate the pipeline on every split of the plan.
pub fn resample(
    pipeline: &Pipeline,
    task: &Task,
    plan: &[SplitIndex],
    seed: u64,
    tracer: Option<&Tracer>,
) -> Result<ResampleResult> {
    resample_with(pipeline, task, plan, seed, tracer, None)
}

/// [`resample`] with an optional wall-clock deadline, checked between
/// splits; splits past the deadline are recorded as failures.
pub fn resample_with(
    pipeline: &Pipeline,
    task: &Task,
    plan: &[SplitIndex],
    seed: u64,
    tracer: Option<&Tracer>,
    deadline: Option<Instant>,
) -> Result<ResampleResult> {
    if plan.is_empty() {
        return Err(Error::InvalidParam("resample plan is empty".into()));
    }
    let mut per_split = Vec::with_capacity(plan.len());
    let mut failures = Vec::new();
    for (split_id, split) in plan.iter().enumerate() {
        if deadline.is_some_and(|d| Instant::now() > d) {
            failures.push(SplitFailure {
                split_id,
                error: "job timeout exceeded".into(),
            });
            continue;
        }
        let split_tracer = tracer.map(|t| t.for_split(split_id));
        match run_split(pipeline, task, split, split_id, seed, split_tracer.as_ref()) {
            Ok(rec) => per_split.push(rec),
            Err(e) => {
                log::warn!("split {split_id} failed: {e}");
                failures.push(SplitFailure {
                    split_id,
                    error: e.to_string(),
                });
            }
        }
    }
    let aggregate = aggregate_of(&per_split, failures.len());
    Ok(ResampleResult {
        per_split,
        failures,
        aggregate,
    })
}

/// Nested resampling: per outer split, tune on the outer-train rows only,
/// refit the best configuration on the full outer-train set and evaluate on
/// the outer-test set. Chosen parameters are recorded per split.
#[allow(clippy::too_many_arguments)]
pub fn nested_resample(
    pipeline: &Pipeline,
    task: &Task,
    plan: &[SplitIndex],
    space: &ParamSpace,
    budget: usize,
    inner_k: usize,
    strategy: TuneStrategy,
    seed: u64,
    tracer: Option<&Tracer>,
) -> Result<ResampleResult> {
    nested_resample_with(
        pipeline, task, plan, space, budget, inner_k, strategy, seed, tracer, None,
    )
}

/// [`nested_resample`] with an optional wall-clock deadline, checked
/// between outer splits.
#[allow(clippy::too_many_arguments)]
pub fn nested_resample_with(
    pipeline: &Pipeline,
    task: &Task,
    plan: &[SplitIndex],
    space: &ParamSpace,
    budget: usize,
    inner_k: usize,
    strategy: TuneStrategy,
    seed: u64,
    tracer: Option<&Tracer>,
    deadline: Option<Instant>,
) -> Result<ResampleResult> {
    if plan.is_empty() {
        return Err(Error::InvalidParam("resample plan is empty".into()));
    }
    let labels = task.class_labels()?;
    let mut per_split = Vec::with_capacity(plan.len());
    let mut failures = Vec::new();
    for (split_id, split) in plan.iter().enumerate() {
        if deadline.is_some_and(|d| Instant::now() > d) {
            failures.push(SplitFailure {
                split_id,
                error: "job timeout exceeded".into(),
            });
            continue;
        }
        let split_tracer = tracer.map(|t| t.for_split(split_id));
        let result = (|| -> Result<SplitRecord> {
            let t0 = Instant::now();
            let tuned = tune(
                pipeline,
                task,
                split.train(),
                space,
                budget,
                inner_k,
                strategy,
                derive_seed(seed, 0x7475_6e65_0000 | split_id as u64),
                split_tracer.as_ref(),
            )?;
            let tune_seconds = t0.elapsed().as_secs_f64();

            let candidate = pipeline.with_assignment(&tuned.best_params)?;
            let (preds, timings) = candidate.fit_predict_timed(
                task,
                split.train(),
                split.test(),
                derive_seed(seed, split_id as u64),
                split_tracer.as_ref(),
            )?;
            let truth: Vec<ClassId> = split.test().iter().map(|&i| labels[i]).collect();
            let loss = mmce(&truth, &preds)?;
            Ok(SplitRecord {
                split_id,
                mmce: loss,
                accuracy: 1.0 - loss,
                fit_seconds: timings.fit_seconds,
                predict_seconds: timings.predict_seconds,
                tune_seconds,
                chosen_params: Some(tuned.best_params),
            })
        })();
        match result {
            Ok(rec) => per_split.push(rec),
            Err(e) => {
                log::warn!("nested split {split_id} failed: {e}");
                failures.push(SplitFailure {
                    split_id,
                    error: e.to_string(),
                });
            }
        }
    }
    let aggregate = aggregate_of(&per_split, failures.len());
    Ok(ResampleResult {
        per_split,
        failures,
        aggregate,
    })
}
