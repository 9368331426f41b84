//! Declarative benchmark configuration (TOML).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::ExtractorSpec;
use crate::fdata::{load_csv_with_sidecar, load_ucr_tsv, Task};
use crate::learn::LearnerSpec;
use crate::params::{from_toml_table, ParamValue};
use crate::pipeline::space::{joint_space, preset, ParamEntry, ParamKind, ParamSpace, Trafo};
use crate::pipeline::tune::TuneStrategy;
use crate::pipeline::{Pipeline, UnmappedPolicy};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub name: String,
    pub path: PathBuf,
    /// JSON sidecar for CSV tables; UCR series files need none.
    #[serde(default)]
    pub sidecar: Option<PathBuf>,
    pub split_fraction: f64,
    #[serde(default = "default_n_splits")]
    pub n_splits: usize,
}

fn default_n_splits() -> usize {
    20
}

impl DatasetConfig {
    pub fn load(&self) -> Result<Task> {
        match &self.sidecar {
            Some(sc) => load_csv_with_sidecar(&self.path, sc),
            None => load_ucr_tsv(&self.path),
        }
        .map(|t| t.renamed(&self.name))
    }
}

/// Extractor wiring of one pipeline: raw flattening, dropping, or an
/// explicit per-feature method table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtractorsConfig {
    Mode(String),
    PerFeature(BTreeMap<String, toml::Table>),
}

impl Default for ExtractorsConfig {
    fn default() -> Self {
        ExtractorsConfig::Mode("raw".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceEntryConfig {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<String>>,
    #[serde(default)]
    pub trafo: Option<String>,
    #[serde(default)]
    pub default: Option<toml::Value>,
}

impl SpaceEntryConfig {
    fn build(&self) -> Result<ParamEntry> {
        let kind = match self.kind.as_str() {
            "real" => ParamKind::Real {
                lo: self.lo.ok_or_else(|| missing(&self.id, "lo"))?,
                hi: self.hi.ok_or_else(|| missing(&self.id, "hi"))?,
            },
            "int" => ParamKind::Int {
                lo: self.lo.ok_or_else(|| missing(&self.id, "lo"))? as i64,
                hi: self.hi.ok_or_else(|| missing(&self.id, "hi"))? as i64,
            },
            "categorical" => ParamKind::Categorical {
                values: self
                    .values
                    .clone()
                    .ok_or_else(|| missing(&self.id, "values"))?,
            },
            other => {
                return Err(Error::Config(format!(
                    "space entry `{}`: unknown type `{other}`",
                    self.id
                )))
            }
        };
        let trafo = match self.trafo.as_deref() {
            None | Some("identity") => Trafo::Identity,
            Some("pow2") => Trafo::Pow2,
            Some("powp") => Trafo::PowP,
            Some("nodesize") => Trafo::NodeSize,
            Some(other) => {
                return Err(Error::Config(format!(
                    "space entry `{}`: unknown trafo `{other}`",
                    self.id
                )))
            }
        };
        let default = match &self.default {
            None => None,
            Some(toml::Value::Integer(i)) => Some(ParamValue::Int(*i)),
            Some(toml::Value::Float(f)) => Some(ParamValue::Real(*f)),
            Some(toml::Value::String(s)) => Some(ParamValue::Str(s.clone())),
            Some(v) => {
                return Err(Error::Config(format!(
                    "space entry `{}`: unsupported default {v}",
                    self.id
                )))
            }
        };
        Ok(ParamEntry {
            id: self.id.clone(),
            kind,
            default,
            trafo,
        })
    }
}

fn missing(id: &str, field: &str) -> Error {
    Error::Config(format!("space entry `{id}`: missing `{field}`"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub id: String,
    #[serde(default)]
    pub extractors: ExtractorsConfig,
    pub learner: toml::Table,
    #[serde(default)]
    pub tuned: bool,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_inner_k")]
    pub inner_k: usize,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    /// "auto", a named preset, or overridden by `space_entries`.
    #[serde(default = "default_space")]
    pub space: String,
    #[serde(default)]
    pub space_entries: Vec<SpaceEntryConfig>,
    #[serde(default = "default_true")]
    pub include_scalars: bool,
}

fn default_budget() -> usize {
    100
}

fn default_inner_k() -> usize {
    3
}

fn default_strategy() -> String {
    "smbo".into()
}

fn default_space() -> String {
    "auto".into()
}

fn default_true() -> bool {
    true
}

impl PipelineConfig {
    pub fn build_pipeline(&self) -> Result<Pipeline> {
        let (extractors, unmapped) = match &self.extractors {
            ExtractorsConfig::Mode(mode) => match mode.as_str() {
                "raw" => (BTreeMap::new(), UnmappedPolicy::Flatten),
                "none" => (BTreeMap::new(), UnmappedPolicy::Drop),
                other => {
                    return Err(Error::Config(format!(
                        "pipeline `{}`: extractors mode must be raw or none, got `{other}`",
                        self.id
                    )))
                }
            },
            ExtractorsConfig::PerFeature(map) => {
                let mut specs = BTreeMap::new();
                for (feature, table) in map {
                    let params = from_toml_table(table)?;
                    let method = params.get_str("method", "");
                    if method.is_empty() {
                        return Err(Error::Config(format!(
                            "pipeline `{}`: extractor for `{feature}` is missing `method`",
                            self.id
                        )));
                    }
                    let mut rest = params.clone();
                    rest.0.remove("method");
                    specs.insert(feature.clone(), ExtractorSpec::from_params(&method, &rest)?);
                }
                (specs, UnmappedPolicy::Drop)
            }
        };
        let learner_params = from_toml_table(&self.learner)?;
        let method = learner_params.get_str("method", "");
        if method.is_empty() {
            return Err(Error::Config(format!(
                "pipeline `{}`: learner is missing `method`",
                self.id
            )));
        }
        let mut rest = learner_params.clone();
        rest.0.remove("method");
        let learner = LearnerSpec::from_params(&method, &rest)?;
        Ok(Pipeline {
            extractors,
            learner,
            include_scalars: self.include_scalars,
            unmapped,
        })
    }

    pub fn strategy(&self) -> Result<TuneStrategy> {
        self.strategy.parse()
    }

    /// Resolve the tuning space for this pipeline on a task.
    pub fn space_for(&self, pipeline: &Pipeline, task: &Task) -> Result<ParamSpace> {
        if !self.space_entries.is_empty() {
            let entries = self
                .space_entries
                .iter()
                .map(|e| e.build())
                .collect::<Result<Vec<_>>>()?;
            return ParamSpace::new(entries);
        }
        match self.space.as_str() {
            "auto" => joint_space(pipeline, task),
            name => preset(name),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub output_dir: PathBuf,
    /// Per-job wall-clock budget; a job past it is recorded as failed.
    #[serde(default = "default_timeout")]
    pub job_timeout_seconds: f64,
    pub datasets: Vec<DatasetConfig>,
    pub pipelines: Vec<PipelineConfig>,
}

fn default_workers() -> usize {
    1
}

fn default_timeout() -> f64 {
    300.0
}

impl BenchmarkConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: BenchmarkConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("no datasets configured".into()));
        }
        if self.pipelines.is_empty() {
            return Err(Error::Config("no pipelines configured".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for p in &self.pipelines {
            if !ids.insert(&p.id) {
                return Err(Error::Config(format!("duplicate pipeline id `{}`", p.id)));
            }
            if p.tuned && p.budget == 0 {
                return Err(Error::Config(format!(
                    "pipeline `{}`: tuned with budget 0",
                    p.id
                )));
            }
            p.build_pipeline()?;
            p.strategy()?;
        }
        let mut names = std::collections::BTreeSet::new();
        for d in &self.datasets {
            if !names.insert(&d.name) {
                return Err(Error::Config(format!(
                    "duplicate dataset name `{}`",
                    d.name
                )));
            }
            if !(d.split_fraction > 0.0 && d.split_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "dataset `{}`: split_fraction must be in (0,1), got {}",
                    d.name, d.split_fraction
                )));
            }
            if d.n_splits == 0 {
                return Err(Error::Config(format!(
                    "dataset `{}`: n_splits must be >= 1",
                    d.name
                )));
            }
        }
        Ok(())
    }
}
