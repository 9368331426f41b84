//! Functional-data classification toolbox.
//!
//! Curves (equal-length series on a grid) live next to scalar features in a
//! [`fdata::FunctionalDataset`]. Feature extractors ([`extract`]) map curves
//! to scalar feature vectors with a fit-on-train / transform-anywhere
//! contract, learners ([`learn`]) classify the result, and a pipeline
//! ([`pipeline`]) fuses both into a single unit with a jointly tunable
//! parameter space. Resampled evaluation and nested tuning live in
//! [`resample`]; the declarative benchmark harness and its aggregations in
//! [`bench`].

pub mod bench;
pub mod error;
pub mod extract;
pub mod fdata;
pub mod learn;
mod linalg;
pub mod params;
pub mod pipeline;
pub mod resample;
pub mod seeds;
pub mod trace;

pub use error::{Error, Result};
