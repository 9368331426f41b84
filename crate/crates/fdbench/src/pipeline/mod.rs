//! Extractor-learner pipelines.
//!
//! One extractor per functional feature fused with a learner forms a single
//! unit: extractors fit on training rows only, transform train and test, the
//! blocks concatenate (plus scalar features when flagged) and the learner
//! runs on the result. The joint hyperparameter space of all stages is
//! exposed through [`space::ParamSpace`] and searched by [`tune`].

pub mod space;
pub mod tune;

pub use space::{ParamEntry, ParamKind, ParamSpace, Trafo, TrafoContext};
pub use tune::{tune, tune_with, TuneResult, TuneStrategy};

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::ExtractorSpec;
use crate::fdata::{ClassId, Task};
use crate::learn::LearnerSpec;
use crate::params::ParamMap;
use crate::seeds::{derive_seed, derive_seed_str};
use crate::trace::{Stage, Tracer};

/// What happens to functional features without a mapped extractor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnmappedPolicy {
    /// Leave them out of the feature matrix.
    #[default]
    Drop,
    /// Splice the raw curve columns in unchanged.
    Flatten,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pipeline {
    /// Functional feature name -> extractor spec.
    pub extractors: BTreeMap<String, ExtractorSpec>,
    pub learner: LearnerSpec,
    pub include_scalars: bool,
    pub unmapped: UnmappedPolicy,
}

/// Train/test feature matrices produced by the extraction stage.
pub struct TransformedFeatures {
    pub train: Array2<f64>,
    pub test: Array2<f64>,
    pub names: Vec<String>,
    /// Width contributed by each block, extractor blocks first.
    pub block_widths: Vec<usize>,
}

/// Wall-clock stage timings of one fit/predict run.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

impl Pipeline {
    /// A pipeline with no extractors that flattens raw curves into the
    /// learner (plus scalars).
    pub fn raw(learner: LearnerSpec) -> Self {
        Self {
            extractors: BTreeMap::new(),
            learner,
            include_scalars: true,
            unmapped: UnmappedPolicy::Flatten,
        }
    }

    pub fn with_extractors(
        extractors: BTreeMap<String, ExtractorSpec>,
        learner: LearnerSpec,
    ) -> Self {
        Self {
            extractors,
            learner,
            include_scalars: true,
            unmapped: UnmappedPolicy::Drop,
        }
    }

    fn validate_against(&self, task: &Task) -> Result<()> {
        for name in self.extractors.keys() {
            if task.dataset().functional_feature(name).is_none() {
                return Err(Error::Config(format!(
                    "pipeline maps extractor to unknown functional feature `{name}`"
                )));
            }
        }
        Ok(())
    }

    /// Fit every extractor on the train rows and transform both index sets.
    pub fn transform(
        &self,
        task: &Task,
        train: &[usize],
        test: &[usize],
        seed: u64,
        tracer: Option<&Tracer>,
    ) -> Result<TransformedFeatures> {
        self.validate_against(task)?;
        if let Some(t) = tracer {
            t.record(Stage::Fit, train);
        }
        let ds = task.dataset();
        let mut names: Vec<String> = Vec::new();
        let mut widths: Vec<usize> = Vec::new();
        let mut train_blocks: Vec<Array2<f64>> = Vec::new();
        let mut test_blocks: Vec<Array2<f64>> = Vec::new();

        for feature in ds.functional_features() {
            let fname = feature.name();
            let train_rows = feature.rows(train);
            let test_rows = feature.rows(test);
            match self.extractors.get(fname) {
                Some(spec) => {
                    let stage = format!("extract:{}:{}", spec.method(), fname);
                    let fitted = spec
                        .fit(
                            train_rows.view(),
                            feature.grid(),
                            derive_seed(seed, derive_seed_str(0, fname)),
                        )
                        .map_err(|e| e.in_stage(&stage))?;
                    let tr = fitted
                        .transform(train_rows.view())
                        .map_err(|e| e.in_stage(&stage))?;
                    let te = fitted
                        .transform(test_rows.view())
                        .map_err(|e| e.in_stage(&stage))?;
                    widths.push(tr.width());
                    names.extend(tr.names.iter().map(|n| format!("{fname}.{n}")));
                    train_blocks.push(tr.values);
                    test_blocks.push(te.values);
                }
                None => match self.unmapped {
                    UnmappedPolicy::Drop => {}
                    UnmappedPolicy::Flatten => {
                        widths.push(feature.curve_len());
                        names.extend((1..=feature.curve_len()).map(|t| format!("{fname}.{t}")));
                        train_blocks.push(train_rows);
                        test_blocks.push(test_rows);
                    }
                },
            }
        }
        if self.include_scalars {
            for s in ds.scalar_features() {
                widths.push(1);
                names.push(s.name.clone());
                let col = |idx: &[usize]| {
                    Array2::from_shape_fn((idx.len(), 1), |(i, _)| s.values[idx[i]])
                };
                train_blocks.push(col(train));
                test_blocks.push(col(test));
            }
        }
        if train_blocks.is_empty() {
            return Err(Error::Config(
                "pipeline produced no features (all functional features dropped and no scalars)"
                    .into(),
            ));
        }

        let concat = |blocks: &[Array2<f64>], n: usize| -> Result<Array2<f64>> {
            let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
            ndarray::concatenate(Axis(1), &views)
                .map_err(|e| Error::Shape(format!("feature concatenation: {e} (n={n})")))
        };
        Ok(TransformedFeatures {
            train: concat(&train_blocks, train.len())?,
            test: concat(&test_blocks, test.len())?,
            names,
            block_widths: widths,
        })
    }

    /// Fit on `train`, predict labels for `test`.
    pub fn fit_predict(
        &self,
        task: &Task,
        train: &[usize],
        test: &[usize],
        seed: u64,
    ) -> Result<Vec<ClassId>> {
        self.fit_predict_traced(task, train, test, seed, None)
    }

    pub fn fit_predict_traced(
        &self,
        task: &Task,
        train: &[usize],
        test: &[usize],
        seed: u64,
        tracer: Option<&Tracer>,
    ) -> Result<Vec<ClassId>> {
        Ok(self.fit_predict_timed(task, train, test, seed, tracer)?.0)
    }

    /// Like [`fit_predict_traced`](Self::fit_predict_traced), also returning
    /// wall-clock stage timings. The fit span covers extractor fitting (with
    /// both transforms) and learner fitting; the predict span the learner
    /// prediction.
    pub fn fit_predict_timed(
        &self,
        task: &Task,
        train: &[usize],
        test: &[usize],
        seed: u64,
        tracer: Option<&Tracer>,
    ) -> Result<(Vec<ClassId>, PhaseTimings)> {
        for part in [train, test] {
            for &i in part {
                if i >= task.n_obs() {
                    return Err(Error::InvalidParam(format!(
                        "index {i} out of range for {} observations",
                        task.n_obs()
                    )));
                }
            }
        }
        let t0 = std::time::Instant::now();
        let features = self.transform(task, train, test, seed, tracer)?;
        let labels = task.class_labels()?;
        let train_labels: Vec<ClassId> = train.iter().map(|&i| labels[i]).collect();
        let stage = format!("learn:{}", self.learner.method());
        let fitted = self
            .learner
            .fit(
                features.train.view(),
                &train_labels,
                task.n_classes()?,
                derive_seed(seed, 0x6c65_61726e),
            )
            .map_err(|e| e.in_stage(&stage))?;
        let fit_seconds = t0.elapsed().as_secs_f64();
        if let Some(t) = tracer {
            t.record(Stage::Predict, test);
        }
        let t1 = std::time::Instant::now();
        let preds = fitted
            .predict(features.test.view())
            .map_err(|e| e.in_stage(&stage))?;
        Ok((
            preds,
            PhaseTimings {
                fit_seconds,
                predict_seconds: t1.elapsed().as_secs_f64(),
            },
        ))
    }

    /// Copy of this pipeline with tuning-space values applied. Entries for a
    /// specific feature's extractor are prefixed `feature:`; bare ids go to
    /// the learner first, then to the extractors in name order.
    pub fn with_assignment(&self, assignment: &ParamMap) -> Result<Pipeline> {
        let mut out = self.clone();
        'params: for (key, value) in &assignment.0 {
            if let Some((feature, param)) = key.split_once(':') {
                let spec = out.extractors.get_mut(feature).ok_or_else(|| {
                    Error::InvalidParam(format!(
                        "assignment targets unknown functional feature `{feature}`"
                    ))
                })?;
                spec.set_param(param, value)?;
                continue;
            }
            match out.learner.set_param(key, value) {
                Ok(()) => continue,
                Err(_) => {
                    for spec in out.extractors.values_mut() {
                        if spec.set_param(key, value).is_ok() {
                            continue 'params;
                        }
                    }
                    return Err(Error::InvalidParam(format!(
                        "no pipeline stage accepts parameter `{key}`"
                    )));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{FourierCoeff, FourierParams, PcaParams};
    use crate::fdata::synth;
    use crate::learn::{KnnParams, TreeParams};
    use crate::params::ParamValue;
    use crate::resample::mmce;

    fn knn1() -> LearnerSpec {
        LearnerSpec::Knn(KnnParams::default())
    }

    #[test]
    fn identity_pipeline_self_classifies() {
        let task = synth::two_class_frequency(20, 16, 3).unwrap();
        let p = Pipeline::raw(knn1());
        let idx: Vec<usize> = (0..20).collect();
        let preds = p.fit_predict(&task, &idx, &idx, 0).unwrap();
        let truth = task.class_labels().unwrap();
        assert_eq!(mmce(truth, &preds).unwrap(), 0.0);
    }

    #[test]
    fn fourier_amplitude_plus_forest_beats_majority() {
        let task = synth::two_class_frequency(60, 32, 5).unwrap();
        let mut extractors = BTreeMap::new();
        extractors.insert(
            "series".to_string(),
            ExtractorSpec::Fourier(FourierParams {
                coeff: FourierCoeff::Amplitude,
            }),
        );
        let p = Pipeline::with_extractors(
            extractors,
            LearnerSpec::Forest(crate::learn::ForestParams {
                n_trees: 25,
                ..Default::default()
            }),
        );
        let train: Vec<usize> = (0..40).collect();
        let test: Vec<usize> = (40..60).collect();
        let preds = p.fit_predict(&task, &train, &test, 1).unwrap();
        let labels = task.class_labels().unwrap();
        let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
        let correct = preds.iter().zip(&truth).filter(|(a, b)| a == b).count();
        let majority = truth
            .iter()
            .filter(|&&c| c == 0)
            .count()
            .max(truth.iter().filter(|&&c| c == 1).count());
        assert!(
            correct > majority,
            "accuracy {correct}/{} vs majority {majority}",
            test.len()
        );
    }

    #[test]
    fn pca_tree_test_features_come_from_train_fitted_projection() {
        let task = synth::two_class_frequency(30, 16, 7).unwrap();
        let mut extractors = BTreeMap::new();
        extractors.insert("series".into(), ExtractorSpec::Pca(PcaParams { rank: 2 }));
        let p = Pipeline::with_extractors(extractors, LearnerSpec::Tree(TreeParams::default()));
        let train: Vec<usize> = (0..20).collect();
        let test: Vec<usize> = (20..30).collect();
        let tf = p.transform(&task, &train, &test, 0, None).unwrap();

        // leakage-free oracle: fit PCA on the train rows directly, never
        // touching test rows, then apply to test rows
        let feature = &task.dataset().functional_features()[0];
        let fitted =
            crate::extract::pca::fit(&PcaParams { rank: 2 }, feature.rows(&train).view()).unwrap();
        let expect = fitted.transform(feature.rows(&test).view()).unwrap().values;
        assert_eq!(tf.test, expect);
    }

    #[test]
    fn output_width_is_sum_of_blocks() {
        let task = synth::two_class_frequency(12, 16, 9).unwrap();
        let mut extractors = BTreeMap::new();
        extractors.insert("series".into(), ExtractorSpec::Pca(PcaParams { rank: 3 }));
        let p = Pipeline::with_extractors(extractors, knn1());
        let train: Vec<usize> = (0..8).collect();
        let test: Vec<usize> = (8..12).collect();
        let tf = p.transform(&task, &train, &test, 0, None).unwrap();
        assert_eq!(tf.train.ncols(), tf.block_widths.iter().sum::<usize>());
        assert_eq!(tf.train.ncols(), 3); // rank 3, no scalars in this task
        assert_eq!(tf.names.len(), tf.train.ncols());
    }

    #[test]
    fn unknown_feature_name_rejected() {
        let task = synth::two_class_frequency(10, 16, 2).unwrap();
        let mut extractors = BTreeMap::new();
        extractors.insert("nope".into(), ExtractorSpec::Pca(PcaParams { rank: 2 }));
        let p = Pipeline::with_extractors(extractors, knn1());
        assert!(p.fit_predict(&task, &[0, 1], &[2], 0).is_err());
    }

    #[test]
    fn stage_name_attached_to_errors() {
        let task = synth::two_class_frequency(10, 16, 2).unwrap();
        let mut extractors = BTreeMap::new();
        // rank larger than allowed -> extractor error carries its stage
        extractors.insert("series".into(), ExtractorSpec::Pca(PcaParams { rank: 12 }));
        let p = Pipeline::with_extractors(extractors, knn1());
        let err = p
            .fit_predict(&task, &(0..5).collect::<Vec<_>>(), &[5], 0)
            .unwrap_err();
        assert!(err.to_string().contains("extract:pca:series"), "{err}");
    }

    #[test]
    fn assignment_applies_to_stages() {
        let mut extractors = BTreeMap::new();
        extractors.insert("series".into(), ExtractorSpec::Pca(PcaParams { rank: 2 }));
        let p = Pipeline::with_extractors(extractors, LearnerSpec::Knn(KnnParams::default()));
        let mut a = ParamMap::new();
        a.set("rank.", ParamValue::Int(5));
        a.set("k", ParamValue::Int(7));
        let q = p.with_assignment(&a).unwrap();
        match &q.extractors["series"] {
            ExtractorSpec::Pca(pp) => assert_eq!(pp.rank, 5),
            _ => unreachable!(),
        }
        match &q.learner {
            LearnerSpec::Knn(kp) => assert_eq!(kp.k, 7),
            _ => unreachable!(),
        }
        let mut bad = ParamMap::new();
        bad.set("nonsense", ParamValue::Int(1));
        assert!(p.with_assignment(&bad).is_err());
    }
}
