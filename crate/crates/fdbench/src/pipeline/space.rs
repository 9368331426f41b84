//! Tunable parameter spaces with range transformations.
//!
//! Entries sample uniformly in their raw range; `2^x` transformations apply
//! at sample time, while the data-dependent ones (`p^x` feature counts,
//! `2^(log2(n)*x)` node sizes) pass the raw exponent through to the consumer
//! that knows n and p. The appendix tables of ranges ship verbatim as the
//! `paper-extractors` and `paper-learners` presets; `auto` spaces restrict
//! to the methods a pipeline actually uses and to feasible ranges for the
//! task at hand.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::ExtractorSpec;
use crate::fdata::Task;
use crate::learn::{LearnerSpec, Semimetric};
use crate::params::{ParamMap, ParamValue};
use crate::pipeline::Pipeline;

/// Value domain of one entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamKind {
    Real { lo: f64, hi: f64 },
    Int { lo: i64, hi: i64 },
    Categorical { values: Vec<String> },
}

/// Range transformation applied to sampled raw values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trafo {
    Identity,
    /// 2^x, applied at sample time.
    Pow2,
    /// p^x with p = feature count; applied by the consumer (e.g. mtry).
    PowP,
    /// 2^(log2(n) * x) with n = training rows; applied by the consumer.
    NodeSize,
}

/// Data context for the consumer-side transformations.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrafoContext {
    pub n: Option<usize>,
    pub p: Option<usize>,
}

impl Trafo {
    /// Apply the transformation to a raw value. PowP/NodeSize need their
    /// context; without it the raw value passes through unchanged.
    pub fn apply(&self, raw: f64, ctx: &TrafoContext) -> f64 {
        match self {
            Trafo::Identity => raw,
            Trafo::Pow2 => raw.exp2(),
            Trafo::PowP => match ctx.p {
                Some(p) => (p as f64).powf(raw),
                None => raw,
            },
            Trafo::NodeSize => match ctx.n {
                Some(n) => 2f64.powf((n as f64).log2() * raw),
                None => raw,
            },
        }
    }

    /// Whether the transformation is applied at sample time.
    pub fn context_free(&self) -> bool {
        matches!(self, Trafo::Identity | Trafo::Pow2)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamEntry {
    pub id: String,
    pub kind: ParamKind,
    pub default: Option<ParamValue>,
    pub trafo: Trafo,
}

impl ParamEntry {
    pub fn real(id: &str, lo: f64, hi: f64) -> Self {
        Self {
            id: id.into(),
            kind: ParamKind::Real { lo, hi },
            default: None,
            trafo: Trafo::Identity,
        }
    }

    pub fn int(id: &str, lo: i64, hi: i64) -> Self {
        Self {
            id: id.into(),
            kind: ParamKind::Int { lo, hi },
            default: None,
            trafo: Trafo::Identity,
        }
    }

    pub fn categorical(id: &str, values: &[&str]) -> Self {
        Self {
            id: id.into(),
            kind: ParamKind::Categorical {
                values: values.iter().map(|s| s.to_string()).collect(),
            },
            default: None,
            trafo: Trafo::Identity,
        }
    }

    pub fn with_default(mut self, v: ParamValue) -> Self {
        self.default = Some(v);
        self
    }

    pub fn with_trafo(mut self, t: Trafo) -> Self {
        self.trafo = t;
        self
    }

    fn default_in_range(&self) -> bool {
        match (&self.default, &self.kind) {
            (None, _) => true,
            (Some(ParamValue::Int(v)), ParamKind::Int { lo, hi }) => v >= lo && v <= hi,
            (Some(ParamValue::Real(v)), ParamKind::Real { lo, hi }) => v >= lo && v <= hi,
            (Some(ParamValue::Int(v)), ParamKind::Real { lo, hi }) => {
                (*v as f64) >= *lo && (*v as f64) <= *hi
            }
            (Some(ParamValue::Str(v)), ParamKind::Categorical { values }) => values.contains(v),
            _ => false,
        }
    }

    /// Sample a raw value and apply context-free transformations.
    fn sample(&self, rng: &mut ChaCha8Rng) -> ParamValue {
        match &self.kind {
            ParamKind::Real { lo, hi } => {
                let raw = lo + rng.random::<f64>() * (hi - lo);
                ParamValue::Real(self.trafo.apply(raw, &TrafoContext::default()))
            }
            ParamKind::Int { lo, hi } => {
                let raw = rng.random_range(*lo..=*hi);
                if self.trafo.context_free() && self.trafo != Trafo::Identity {
                    ParamValue::Real(self.trafo.apply(raw as f64, &TrafoContext::default()))
                } else {
                    ParamValue::Int(raw)
                }
            }
            ParamKind::Categorical { values } => {
                ParamValue::Str(values[rng.random_range(0..values.len())].clone())
            }
        }
    }

    /// Normalize an assignment value into [0,1] for the surrogate model.
    fn encode(&self, value: &ParamValue) -> f64 {
        match (&self.kind, value) {
            (ParamKind::Real { lo, hi }, v) => {
                let raw = match self.trafo {
                    Trafo::Pow2 => v.as_f64().map(f64::log2),
                    _ => v.as_f64(),
                };
                raw.map_or(0.5, |r| ((r - lo) / (hi - lo)).clamp(0.0, 1.0))
            }
            (ParamKind::Int { lo, hi }, v) => v.as_f64().map_or(0.5, |r| {
                ((r - *lo as f64) / ((hi - lo) as f64).max(1.0)).clamp(0.0, 1.0)
            }),
            (ParamKind::Categorical { values }, ParamValue::Str(s)) => {
                let idx = values.iter().position(|v| v == s).unwrap_or(0);
                if values.len() > 1 {
                    idx as f64 / (values.len() - 1) as f64
                } else {
                    0.0
                }
            }
            _ => 0.5,
        }
    }
}

/// An ordered set of tunable entries.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParamSpace {
    pub entries: Vec<ParamEntry>,
}

impl ParamSpace {
    pub fn new(entries: Vec<ParamEntry>) -> Result<Self> {
        let space = Self { entries };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(&e.id) {
                return Err(Error::Config(format!("duplicate space entry `{}`", e.id)));
            }
            let ok = match &e.kind {
                ParamKind::Real { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
                ParamKind::Int { lo, hi } => lo <= hi,
                ParamKind::Categorical { values } => !values.is_empty(),
            };
            if !ok {
                return Err(Error::Config(format!(
                    "empty range for space entry `{}`",
                    e.id
                )));
            }
            if !e.default_in_range() {
                return Err(Error::Config(format!(
                    "default outside range for space entry `{}`",
                    e.id
                )));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The default assignment (entries without defaults are skipped).
    pub fn defaults(&self) -> ParamMap {
        let mut map = ParamMap::new();
        for e in &self.entries {
            if let Some(d) = &e.default {
                map.set(e.id.clone(), d.clone());
            }
        }
        map
    }

    /// Encode an assignment as a numeric row for the surrogate.
    pub(crate) fn encode(&self, assignment: &ParamMap) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| assignment.get(&e.id).map_or(0.5, |v| e.encode(v)))
            .collect()
    }
}

/// Draw one assignment: uniform in each entry's raw range, context-free
/// transformations applied before the consumer sees the value.
pub fn sample_params(space: &ParamSpace, rng: &mut ChaCha8Rng) -> Result<ParamMap> {
    if space.is_empty() {
        return Err(Error::Config("cannot sample from an empty space".into()));
    }
    let mut map = ParamMap::new();
    for e in &space.entries {
        map.set(e.id.clone(), e.sample(rng));
    }
    Ok(map)
}

/// The full extractor parameter table shipped as a named preset. Includes
/// filter values the in-repo wavelet transform does not implement; they are
/// preset documentation, and sampling them fails a candidate rather than
/// the run.
pub fn paper_extractors() -> ParamSpace {
    ParamSpace {
        entries: vec![
            ParamEntry::int("bsignal.knots", 3, 500).with_default(ParamValue::Int(10)),
            ParamEntry::int("bsignal.df", 1, 10).with_default(ParamValue::Int(3)),
            ParamEntry::int("res.level", 2, 5),
            ParamEntry::real("shift", 0.01, 1.0),
            ParamEntry::int("rank.", 1, 30),
            ParamEntry::categorical(
                "filter",
                &[
                    "d4", "d8", "d20", "la8", "la20", "bl14", "bl20", "c6", "c24",
                ],
            ),
            ParamEntry::categorical("boundary", &["periodic", "reflection"]),
            ParamEntry::categorical("trafo.coeff", &["phase", "amplitude"]),
            ParamEntry::categorical("ref.method", &["random", "all"])
                .with_default(ParamValue::Str("random".into())),
            ParamEntry::real("n.refs", 0.0, 1.0),
            ParamEntry::real("dtwwindow", 0.0, 1.0),
        ],
    }
}

/// The learner parameter table shipped verbatim. The SVM, boosting and
/// componentwise-boosting entries have no in-repo consumer; they are housed
/// here as documented presets.
pub fn paper_learners() -> ParamSpace {
    ParamSpace {
        entries: vec![
            // ksvm
            ParamEntry::real("C", -15.0, 15.0).with_trafo(Trafo::Pow2),
            ParamEntry::real("sigma", -15.0, 10.0).with_trafo(Trafo::Pow2),
            // ranger
            ParamEntry::real("mtry.power", 0.0, 1.0).with_trafo(Trafo::PowP),
            ParamEntry::real("min.node.size", 0.0, 0.99).with_trafo(Trafo::NodeSize),
            ParamEntry::real("sample.fraction", 0.1, 1.0),
            // xgboost
            ParamEntry::int("nrounds", 1, 5000).with_default(ParamValue::Int(100)),
            ParamEntry::real("eta", -10.0, 0.0).with_trafo(Trafo::Pow2),
            ParamEntry::real("subsample", 0.1, 1.0),
            ParamEntry::categorical("booster", &["gbtree", "gblinear"]),
            ParamEntry::int("max_depth", 1, 15),
            ParamEntry::real("min_child_weight", 0.0, 7.0).with_trafo(Trafo::Pow2),
            ParamEntry::real("colsample_bytree", 0.0, 1.0),
            ParamEntry::real("colsample_bylevel", 0.0, 1.0),
            ParamEntry::real("lambda", -10.0, 10.0).with_trafo(Trafo::Pow2),
            ParamEntry::real("alpha", -10.0, 10.0).with_trafo(Trafo::Pow2),
            // FDboost
            ParamEntry::int("mstop", 1, 5000).with_default(ParamValue::Int(100)),
            ParamEntry::real("nu", 0.0, 1.0).with_default(ParamValue::Real(0.01)),
            ParamEntry::real("df", 1.0, 5.0).with_default(ParamValue::Real(4.0)),
            ParamEntry::int("knots", 5, 100).with_default(ParamValue::Int(10)),
            ParamEntry::int("degree", 1, 4).with_default(ParamValue::Int(3)),
        ],
    }
}

/// Entries for one extractor, restricted to implemented values and to
/// feasible ranges for curve length `l`. `prefix` namespaces the ids when a
/// pipeline maps more than one functional feature.
fn extractor_entries(spec: &ExtractorSpec, l: usize, prefix: &str) -> Vec<ParamEntry> {
    let id = |s: &str| format!("{prefix}{s}");
    match spec {
        ExtractorSpec::Fourier(_) => {
            vec![
                ParamEntry::categorical(&id("trafo.coeff"), &["phase", "amplitude"])
                    .with_default(ParamValue::Str("amplitude".into())),
            ]
        }
        ExtractorSpec::Wavelets(_) => vec![
            ParamEntry::categorical(&id("filter"), &["haar", "d4", "d8"])
                .with_default(ParamValue::Str("haar".into())),
            ParamEntry::categorical(&id("boundary"), &["periodic", "reflection"])
                .with_default(ParamValue::Str("periodic".into())),
        ],
        ExtractorSpec::Bsignal(_) => {
            let max_knots = (l.saturating_sub(1)).min(500).max(3) as i64;
            vec![
                ParamEntry::int(&id("bsignal.knots"), 3, max_knots)
                    .with_default(ParamValue::Int(10.min(max_knots))),
                ParamEntry::int(&id("bsignal.df"), 1, 10).with_default(ParamValue::Int(3)),
            ]
        }
        ExtractorSpec::Pca(_) => {
            vec![ParamEntry::int(&id("rank."), 1, 30.min(l as i64).max(1))
                .with_default(ParamValue::Int(4.min(l as i64)))]
        }
        ExtractorSpec::DtwKernel(_) => vec![
            ParamEntry::categorical(&id("ref.method"), &["random", "all"])
                .with_default(ParamValue::Str("random".into())),
            ParamEntry::real(&id("n.refs"), 0.01, 1.0).with_default(ParamValue::Real(0.1)),
            ParamEntry::real(&id("dtwwindow"), 0.0, 1.0).with_default(ParamValue::Real(1.0)),
        ],
        ExtractorSpec::MultiRes(_) => {
            let max_level = (l as f64).log2().floor() as i64;
            vec![
                ParamEntry::int(&id("res.level"), 2.min(max_level), 5.min(max_level))
                    .with_default(ParamValue::Int(3.clamp(1, max_level))),
                ParamEntry::real(&id("shift"), 0.01, 1.0).with_default(ParamValue::Real(0.5)),
            ]
        }
        ExtractorSpec::Tsfeat(_) => vec![],
    }
}

fn learner_entries(spec: &LearnerSpec, n_train_hint: usize) -> Vec<ParamEntry> {
    match spec {
        LearnerSpec::Knn(p) => {
            let max_k = (n_train_hint / 2).clamp(1, 30) as i64;
            let mut v = vec![ParamEntry::int("k", 1, max_k).with_default(ParamValue::Int(1))];
            if matches!(p.metric, Semimetric::Dtw { .. }) {
                v.push(
                    ParamEntry::real("knn.window", 0.0, 1.0).with_default(ParamValue::Real(1.0)),
                );
            }
            v
        }
        LearnerSpec::KernelNp(p) => {
            let mut v = vec![ParamEntry::real("h", -10.0, 10.0)
                .with_trafo(Trafo::Pow2)
                .with_default(ParamValue::Real(1.0))];
            if matches!(p.metric, Semimetric::Dtw { .. }) {
                v.push(
                    ParamEntry::real("kernel.window", 0.0, 1.0).with_default(ParamValue::Real(1.0)),
                );
            }
            v
        }
        LearnerSpec::Fglm(_) => vec![
            ParamEntry::int("fglm.knots", 5, 30).with_default(ParamValue::Int(10)),
            ParamEntry::real("fglm.df", 1.0, 10.0).with_default(ParamValue::Real(3.0)),
            ParamEntry::real("fglm.lambda", -10.0, 10.0)
                .with_trafo(Trafo::Pow2)
                .with_default(ParamValue::Real(1e-3)),
        ],
        LearnerSpec::Tree(_) => vec![
            ParamEntry::int("minsplit", 1, 30).with_default(ParamValue::Int(1)),
            ParamEntry::int("maxdepth", 1, 30).with_default(ParamValue::Int(30)),
        ],
        LearnerSpec::Forest(_) => vec![
            ParamEntry::real("mtry.power", 0.0, 1.0)
                .with_trafo(Trafo::PowP)
                .with_default(ParamValue::Real(0.5)),
            ParamEntry::real("min.node.size", 0.0, 0.99)
                .with_trafo(Trafo::NodeSize)
                .with_default(ParamValue::Real(0.0)),
            ParamEntry::real("sample.fraction", 0.1, 1.0).with_default(ParamValue::Real(1.0)),
        ],
    }
}

/// The joint tunable space of a pipeline on a task: extractor entries for
/// every mapped feature plus learner entries, concatenated.
pub fn joint_space(pipeline: &Pipeline, task: &Task) -> Result<ParamSpace> {
    let mut entries = Vec::new();
    let multi = pipeline.extractors.len() > 1;
    for (fname, spec) in &pipeline.extractors {
        let feature = task.dataset().functional_feature(fname).ok_or_else(|| {
            Error::Config(format!(
                "pipeline maps unknown functional feature `{fname}`"
            ))
        })?;
        let prefix = if multi {
            format!("{fname}:")
        } else {
            String::new()
        };
        entries.extend(extractor_entries(spec, feature.curve_len(), &prefix));
    }
    entries.extend(learner_entries(&pipeline.learner, task.n_obs()));
    ParamSpace::new(entries)
}

/// Resolve a named preset.
pub fn preset(name: &str) -> Result<ParamSpace> {
    match name {
        "paper-extractors" => Ok(paper_extractors()),
        "paper-learners" => Ok(paper_learners()),
        other => Err(Error::Config(format!(
            "unknown space preset `{other}` (available: paper-extractors, paper-learners)"
        ))),
    }
}
