//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolbox.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file (ragged rows, bad header, ...).
    #[error("format error: {0}")]
    Format(String),

    /// A cell that should be numeric is not.
    #[error("parse error: {0}")]
    Parse(String),

    /// Task-level constraint violated (too few classes, bad target, ...).
    #[error("task error: {0}")]
    Task(String),

    /// Parameter outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Matrix/vector dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Iterative fit did not reach its tolerance.
    #[error("did not converge after {iterations} iterations (last deviance {deviance:.6e}, relative change {rel_change:.3e})")]
    NonConvergence {
        iterations: usize,
        deviance: f64,
        rel_change: f64,
    },

    /// Benchmark configuration problem.
    #[error("config error: {0}")]
    Config(String),

    /// Error raised inside a named pipeline stage.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the pipeline stage that produced this error.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
