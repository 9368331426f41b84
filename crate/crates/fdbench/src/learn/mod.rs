//! Classifiers: functional-method families (semimetric kNN, kernel scores,
//! penalized functional GLM) plus classical learners (CART, random forest)
//! for extracted or flattened features. Specs and fitted models are separate
//! types; fitted models serialize to self-describing JSON.

pub mod fglm;
pub mod forest;
pub mod kernel;
pub mod knn;
pub mod regress;
pub mod tree;

pub use fglm::FglmParams;
pub use forest::{mtry_from_power, node_size_from_exp, ForestParams};
pub use kernel::KernelNpParams;
pub use knn::KnnParams;
pub use tree::TreeParams;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::dtw_distance;
use crate::fdata::ClassId;
use crate::params::{ParamMap, ParamValue};

/// Distance-like function on feature rows; DTW treats rows as series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Semimetric {
    Euclidean,
    Dtw { window: f64 },
}

impl Semimetric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Semimetric::Euclidean => {
                if a.len() != b.len() {
                    return Err(Error::Shape(format!(
                        "euclidean distance on lengths {} and {}",
                        a.len(),
                        b.len()
                    )));
                }
                Ok(a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt())
            }
            Semimetric::Dtw { window } => dtw_distance(a, b, *window),
        }
    }

    fn from_params(params: &ParamMap) -> Result<Self> {
        match params.get_str("metric", "euclidean").as_str() {
            "euclidean" => Ok(Semimetric::Euclidean),
            "dtw" => Ok(Semimetric::Dtw {
                window: params.get_f64("window", 1.0)?,
            }),
            other => Err(Error::InvalidParam(format!(
                "unknown metric `{other}` (expected euclidean or dtw)"
            ))),
        }
    }
}

/// An unfitted learner: method plus parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum LearnerSpec {
    Knn(KnnParams),
    KernelNp(KernelNpParams),
    Fglm(FglmParams),
    Tree(TreeParams),
    Forest(ForestParams),
}

pub const METHOD_NAMES: [&str; 5] = ["knn", "kernel_np", "fglm", "tree", "forest"];

impl LearnerSpec {
    pub fn method(&self) -> &'static str {
        match self {
            LearnerSpec::Knn(_) => "knn",
            LearnerSpec::KernelNp(_) => "kernel_np",
            LearnerSpec::Fglm(_) => "fglm",
            LearnerSpec::Tree(_) => "tree",
            LearnerSpec::Forest(_) => "forest",
        }
    }

    pub fn from_params(method: &str, params: &ParamMap) -> Result<Self> {
        match method {
            "knn" => {
                params.reject_unknown("knn", &["k", "metric", "window"])?;
                Ok(LearnerSpec::Knn(KnnParams {
                    k: params.get_usize("k", 1)?,
                    metric: Semimetric::from_params(params)?,
                }))
            }
            "kernel_np" => {
                params.reject_unknown("kernel_np", &["h", "bandwidth", "metric", "window"])?;
                Ok(LearnerSpec::KernelNp(KernelNpParams {
                    bandwidth: params.get_f64("h", params.get_f64("bandwidth", 1.0)?)?,
                    metric: Semimetric::from_params(params)?,
                }))
            }
            "fglm" => {
                params.reject_unknown("fglm", &["knots", "df", "lambda"])?;
                let d = FglmParams::default();
                Ok(LearnerSpec::Fglm(FglmParams {
                    knots: params.get_usize("knots", d.knots)?,
                    df: params.get_f64("df", d.df)?,
                    lambda: params.get_f64("lambda", d.lambda)?,
                    ..d
                }))
            }
            "tree" => {
                params.reject_unknown(
                    "tree",
                    &["min_node_size", "minsplit", "max_depth", "maxdepth"],
                )?;
                let d = TreeParams::default();
                Ok(LearnerSpec::Tree(TreeParams {
                    min_node_size: params.get_usize(
                        "min_node_size",
                        params.get_usize("minsplit", d.min_node_size)?,
                    )?,
                    max_depth: params
                        .get_usize("max_depth", params.get_usize("maxdepth", d.max_depth)?)?,
                }))
            }
            "forest" => {
                params.reject_unknown(
                    "forest",
                    &[
                        "n_trees",
                        "num.trees",
                        "mtry_power",
                        "mtry.power",
                        "min_node_size_exp",
                        "min.node.size",
                        "sample_fraction",
                        "sample.fraction",
                        "max_depth",
                    ],
                )?;
                let d = ForestParams::default();
                Ok(LearnerSpec::Forest(ForestParams {
                    n_trees: params
                        .get_usize("n_trees", params.get_usize("num.trees", d.n_trees)?)?,
                    mtry_power: params
                        .get_f64("mtry_power", params.get_f64("mtry.power", d.mtry_power)?)?,
                    min_node_size_exp: params.get_f64(
                        "min_node_size_exp",
                        params.get_f64("min.node.size", d.min_node_size_exp)?,
                    )?,
                    sample_fraction: params.get_f64(
                        "sample_fraction",
                        params.get_f64("sample.fraction", d.sample_fraction)?,
                    )?,
                    max_depth: params.get_usize("max_depth", d.max_depth)?,
                }))
            }
            other => Err(Error::InvalidParam(format!(
                "unknown learner `{other}` (implemented: {})",
                METHOD_NAMES.join(", ")
            ))),
        }
    }

    /// Override one parameter by its tuning-space id.
    pub fn set_param(&mut self, key: &str, value: &ParamValue) -> Result<()> {
        let bad =
            |key: &str, v: &ParamValue| Error::InvalidParam(format!("`{key}`: bad value {v}"));
        match self {
            LearnerSpec::Knn(p) => match key {
                "k" => p.k = value.as_i64().ok_or_else(|| bad(key, value))? as usize,
                "knn.window" => {
                    let w = value.as_f64().ok_or_else(|| bad(key, value))?;
                    p.metric = Semimetric::Dtw { window: w };
                }
                _ => return Err(unknown_param("knn", key)),
            },
            LearnerSpec::KernelNp(p) => match key {
                "h" => p.bandwidth = value.as_f64().ok_or_else(|| bad(key, value))?,
                "kernel.window" => {
                    let w = value.as_f64().ok_or_else(|| bad(key, value))?;
                    p.metric = Semimetric::Dtw { window: w };
                }
                _ => return Err(unknown_param("kernel_np", key)),
            },
            LearnerSpec::Fglm(p) => match key {
                "fglm.knots" => p.knots = value.as_i64().ok_or_else(|| bad(key, value))? as usize,
                "fglm.df" => p.df = value.as_f64().ok_or_else(|| bad(key, value))?,
                "fglm.lambda" => p.lambda = value.as_f64().ok_or_else(|| bad(key, value))?,
                _ => return Err(unknown_param("fglm", key)),
            },
            LearnerSpec::Tree(p) => match key {
                "minsplit" => {
                    p.min_node_size = value.as_i64().ok_or_else(|| bad(key, value))? as usize
                }
                "maxdepth" => p.max_depth = value.as_i64().ok_or_else(|| bad(key, value))? as usize,
                _ => return Err(unknown_param("tree", key)),
            },
            LearnerSpec::Forest(p) => match key {
                "num.trees" => p.n_trees = value.as_i64().ok_or_else(|| bad(key, value))? as usize,
                "mtry.power" => p.mtry_power = value.as_f64().ok_or_else(|| bad(key, value))?,
                "min.node.size" => {
                    p.min_node_size_exp = value.as_f64().ok_or_else(|| bad(key, value))?
                }
                "sample.fraction" => {
                    p.sample_fraction = value.as_f64().ok_or_else(|| bad(key, value))?
                }
                _ => return Err(unknown_param("forest", key)),
            },
        }
        Ok(())
    }

    /// Fit on training features. `seed` drives row/feature sampling in the
    /// forest and is ignored by the deterministic learners.
    pub fn fit(
        &self,
        x: ArrayView2<f64>,
        labels: &[ClassId],
        n_classes: usize,
        seed: u64,
    ) -> Result<FittedLearner> {
        if x.nrows() == 0 {
            return Err(Error::Shape("learner fit on empty training set".into()));
        }
        Ok(match self {
            LearnerSpec::Knn(p) => FittedLearner::Knn(knn::fit(p, x, labels, n_classes)?),
            LearnerSpec::KernelNp(p) => {
                FittedLearner::KernelNp(kernel::fit(p, x, labels, n_classes)?)
            }
            LearnerSpec::Fglm(p) => FittedLearner::Fglm(fglm::fit(p, x, labels, n_classes)?),
            LearnerSpec::Tree(p) => FittedLearner::Tree(tree::fit(p, x, labels, n_classes)?),
            LearnerSpec::Forest(p) => {
                FittedLearner::Forest(forest::fit(p, x, labels, n_classes, seed)?)
            }
        })
    }
}

fn unknown_param(method: &str, key: &str) -> Error {
    Error::InvalidParam(format!("no tunable parameter `{key}` on {method}"))
}

/// A fitted model; predictions are class ids from the training label set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FittedLearner {
    Knn(knn::KnnFitted),
    KernelNp(kernel::KernelNpFitted),
    Fglm(fglm::FglmFitted),
    Tree(tree::TreeFitted),
    Forest(forest::ForestFitted),
}

impl FittedLearner {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ClassId>> {
        match self {
            FittedLearner::Knn(m) => m.predict(x),
            FittedLearner::KernelNp(m) => m.predict(x),
            FittedLearner::Fglm(m) => m.predict(x),
            FittedLearner::Tree(m) => m.predict(x),
            FittedLearner::Forest(m) => m.predict(x),
        }
    }

    /// Self-describing JSON form for benchmark reproducibility.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(format!("model serialization: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("model deserialization: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn knn_and_kernel_are_invariant_to_monotone_distance_transforms() {
        // Ordering invariance: scaling every coordinate scales all pairwise
        // Euclidean distances monotonically; kNN votes use order only. The
        // kernel classifier reduces to 1-NN in the small-bandwidth limit,
        // which is likewise order-based.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Array2::from_shape_fn((30, 4), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<usize> = (0..30).map(|_| rng.random_range(0..3)).collect();
        let q = Array2::from_shape_fn((12, 4), |_| rng.random_range(-1.0..1.0));

        let base = knn::fit(
            &KnnParams {
                k: 3,
                metric: Semimetric::Euclidean,
            },
            x.view(),
            &labels,
            3,
        )
        .unwrap()
        .predict(q.view())
        .unwrap();
        let scaled = knn::fit(
            &KnnParams {
                k: 3,
                metric: Semimetric::Euclidean,
            },
            (&x * 37.5).view(),
            &labels,
            3,
        )
        .unwrap()
        .predict((&q * 37.5).view())
        .unwrap();
        assert_eq!(base, scaled);

        let k_base = kernel::fit(
            &KernelNpParams {
                bandwidth: 1e-6,
                metric: Semimetric::Euclidean,
            },
            x.view(),
            &labels,
            3,
        )
        .unwrap()
        .predict(q.view())
        .unwrap();
        let k_scaled = kernel::fit(
            &KernelNpParams {
                bandwidth: 1e-6,
                metric: Semimetric::Euclidean,
            },
            (&x * 37.5).view(),
            &labels,
            3,
        )
        .unwrap()
        .predict((&q * 37.5).view())
        .unwrap();
        assert_eq!(k_base, k_scaled);
    }

    #[test]
    fn fitted_models_roundtrip_json() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = Array2::from_shape_fn((20, 3), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let q = Array2::from_shape_fn((8, 3), |_| rng.random_range(-1.0..1.0));
        let specs = [
            LearnerSpec::Knn(KnnParams::default()),
            LearnerSpec::Tree(TreeParams::default()),
            LearnerSpec::Forest(ForestParams {
                n_trees: 5,
                ..Default::default()
            }),
        ];
        for spec in specs {
            let fitted = spec.fit(x.view(), &labels, 2, 3).unwrap();
            let json = fitted.to_json().unwrap();
            assert!(json.contains(spec.method().split('_').next().unwrap()) || !json.is_empty());
            let back = FittedLearner::from_json(&json).unwrap();
            assert_eq!(
                fitted.predict(q.view()).unwrap(),
                back.predict(q.view()).unwrap(),
                "{}",
                spec.method()
            );
        }
    }

    #[test]
    fn all_learners_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = Array2::from_shape_fn((24, 16), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<usize> = (0..24)
            .map(|i| usize::from(x[[i, 0]] + x[[i, 1]] > 0.0))
            .collect();
        let q = Array2::from_shape_fn((10, 16), |_| rng.random_range(-1.0..1.0));
        let specs = [
            LearnerSpec::Knn(KnnParams::default()),
            LearnerSpec::KernelNp(KernelNpParams::default()),
            LearnerSpec::Fglm(FglmParams::default()),
            LearnerSpec::Tree(TreeParams::default()),
            LearnerSpec::Forest(ForestParams {
                n_trees: 7,
                sample_fraction: 0.8,
                ..Default::default()
            }),
        ];
        for spec in specs {
            let a = spec
                .fit(x.view(), &labels, 2, 11)
                .unwrap()
                .predict(q.view())
                .unwrap();
            let b = spec
                .fit(x.view(), &labels, 2, 11)
                .unwrap()
                .predict(q.view())
                .unwrap();
            assert_eq!(a, b, "{}", spec.method());
        }
    }

    #[test]
    fn from_params_builds_dtw_knn() {
        let m = ParamMap::parse_cli("k=1,metric=dtw,window=1.0").unwrap();
        let spec = LearnerSpec::from_params("knn", &m).unwrap();
        match spec {
            LearnerSpec::Knn(p) => {
                assert_eq!(p.k, 1);
                assert_eq!(p.metric, Semimetric::Dtw { window: 1.0 });
            }
            _ => unreachable!(),
        }
    }
}
