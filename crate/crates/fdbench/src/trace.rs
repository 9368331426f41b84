//! Row-access auditing for leakage checks.
//!
//! A [`Tracer`] records which observation rows each stage touched. Pipelines
//! and the tuner report their row gathers through it; tests then assert that
//! no outer-test row was ever read during fit or tune. Tracing is opt-in and
//! free when absent.

use std::sync::{Arc, Mutex};

/// Stage that touched rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Extractor or learner fit (training side).
    Fit,
    /// Any access made while tuning hyperparameters.
    Tune,
    /// Transform/predict on held-out rows.
    Predict,
}

/// One recorded access.
#[derive(Debug, Clone)]
pub struct AccessEvent {
    /// Outer split the access belongs to, if inside a resampling loop.
    pub split: Option<usize>,
    pub stage: Stage,
    pub indices: Vec<usize>,
}

/// Cloneable handle writing into a shared event log.
#[derive(Debug, Clone)]
pub struct Tracer {
    sink: Arc<Mutex<Vec<AccessEvent>>>,
    split: Option<usize>,
    force_stage: Option<Stage>,
}

impl Tracer {
    pub fn new() -> Self {
        Self {
            sink: Arc::new(Mutex::new(Vec::new())),
            split: None,
            force_stage: None,
        }
    }

    /// A handle that tags subsequent events with an outer split id.
    pub fn for_split(&self, split: usize) -> Self {
        Self {
            sink: Arc::clone(&self.sink),
            split: Some(split),
            force_stage: self.force_stage,
        }
    }

    /// A handle that records every access under one stage; the tuner uses
    /// this so its inner fits and predictions all count as tuning reads.
    pub fn forcing(&self, stage: Stage) -> Self {
        Self {
            sink: Arc::clone(&self.sink),
            split: self.split,
            force_stage: Some(stage),
        }
    }

    pub fn record(&self, stage: Stage, indices: &[usize]) {
        self.sink.lock().unwrap().push(AccessEvent {
            split: self.split,
            stage: self.force_stage.unwrap_or(stage),
            indices: indices.to_vec(),
        });
    }

    pub fn events(&self) -> Vec<AccessEvent> {
        self.sink.lock().unwrap().clone()
    }

    /// Number of events where a fit- or tune-stage access touched any of the
    /// given forbidden rows for the given split.
    pub fn violations(&self, split: usize, forbidden: &[usize]) -> usize {
        self.events()
            .iter()
            .filter(|e| e.split == Some(split) && e.stage != Stage::Predict)
            .filter(|e| e.indices.iter().any(|i| forbidden.contains(i)))
            .count()
    }
}

impl Default for Tracer {
    fn default() -> Self {
        Self::new()
    }
}
