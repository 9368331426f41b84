//! Data model for mixed scalar/functional observations.
//!
//! A dataset holds N observations. Each feature is either a scalar column or
//! a functional feature: a curve evaluated on a shared grid, stored as one
//! N×L matrix block (rows = observations).

mod load;
mod split;
pub mod synth;

pub use load::{
    load_csv_with_sidecar, load_ucr_tsv, load_ucr_tsv_files, make_functional_dataset,
    write_ucr_tsv, ColumnSpan,
};
pub use split::{kfold_stratified, stratified_subsample};

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::fnv1a;

/// Class identifier: an index into the task's level names.
pub type ClassId = usize;

/// One functional feature: N curves evaluated on a common grid of length L.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalFeature {
    name: String,
    values: Array2<f64>,
    grid: Vec<f64>,
}

impl FunctionalFeature {
    /// Build a functional feature with the default grid `1..=L`.
    pub fn new(name: impl Into<String>, values: Array2<f64>) -> Result<Self> {
        let l = values.ncols();
        let grid = (1..=l).map(|t| t as f64).collect();
        Self::with_grid(name, values, grid)
    }

    /// Build a functional feature on an explicit grid.
    pub fn with_grid(name: impl Into<String>, values: Array2<f64>, grid: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let l = values.ncols();
        if l < 2 {
            return Err(Error::Shape(format!(
                "functional feature `{name}` needs curve length >= 2, got {l}"
            )));
        }
        if grid.len() != l {
            return Err(Error::Shape(format!(
                "functional feature `{name}`: grid length {} != curve length {l}",
                grid.len()
            )));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParam(format!(
                "functional feature `{name}`: grid must be strictly increasing"
            )));
        }
        if let Some((i, j)) = first_non_finite(&values) {
            return Err(Error::Parse(format!(
                "functional feature `{name}`: missing or non-finite value at row {i}, column {j}"
            )));
        }
        Ok(Self { name, values, grid })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// N×L value matrix, rows = observations.
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    pub fn curve_len(&self) -> usize {
        self.values.ncols()
    }

    /// Copy the given observation rows into a new matrix.
    pub fn rows(&self, idx: &[usize]) -> Array2<f64> {
        self.values.select(Axis(0), idx)
    }
}

fn first_non_finite(values: &Array2<f64>) -> Option<(usize, usize)> {
    for (i, row) in values.rows().into_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

/// A named scalar feature column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalarFeature {
    pub name: String,
    pub values: Vec<f64>,
}

/// N observations of scalar and functional features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionalDataset {
    scalar_features: Vec<ScalarFeature>,
    functional_features: Vec<FunctionalFeature>,
    n_obs: usize,
}

impl FunctionalDataset {
    pub fn new(
        scalar_features: Vec<ScalarFeature>,
        functional_features: Vec<FunctionalFeature>,
    ) -> Result<Self> {
        let n_obs = scalar_features
            .first()
            .map(|s| s.values.len())
            .or_else(|| functional_features.first().map(|f| f.n_obs()))
            .ok_or_else(|| Error::Shape("dataset needs at least one feature".into()))?;
        for s in &scalar_features {
            if s.values.len() != n_obs {
                return Err(Error::Shape(format!(
                    "scalar feature `{}` has {} rows, expected {n_obs}",
                    s.name,
                    s.values.len()
                )));
            }
        }
        for f in &functional_features {
            if f.n_obs() != n_obs {
                return Err(Error::Shape(format!(
                    "functional feature `{}` has {} rows, expected {n_obs}",
                    f.name(),
                    f.n_obs()
                )));
            }
        }
        let mut names: Vec<&str> = scalar_features
            .iter()
            .map(|s| s.name.as_str())
            .chain(functional_features.iter().map(|f| f.name()))
            .collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParam(format!(
                "duplicate feature name `{}`",
                w[0]
            )));
        }
        Ok(Self {
            scalar_features,
            functional_features,
            n_obs,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn scalar_features(&self) -> &[ScalarFeature] {
        &self.scalar_features
    }

    pub fn functional_features(&self) -> &[FunctionalFeature] {
        &self.functional_features
    }

    pub fn functional_feature(&self, name: &str) -> Option<&FunctionalFeature> {
        self.functional_features.iter().find(|f| f.name() == name)
    }
}

/// Prediction target of a task.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Target {
    /// Class ids paired with the level names they index.
    Classification {
        labels: Vec<ClassId>,
        levels: Vec<String>,
    },
    Regression(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    Classification,
    Regression,
}

/// A supervised task: dataset plus target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Task {
    name: String,
    dataset: FunctionalDataset,
    target: Target,
}

impl Task {
    pub fn classification(
        name: impl Into<String>,
        dataset: FunctionalDataset,
        labels: Vec<ClassId>,
        levels: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if labels.len() != dataset.n_obs() {
            return Err(Error::Shape(format!(
                "task `{name}`: {} labels for {} observations",
                labels.len(),
                dataset.n_obs()
            )));
        }
        if levels.len() < 2 {
            return Err(Error::Task(format!(
                "task `{name}` has {} class level(s), need at least 2",
                levels.len()
            )));
        }
        let mut seen = vec![false; levels.len()];
        for &c in &labels {
            if c >= levels.len() {
                return Err(Error::Task(format!(
                    "task `{name}`: label id {c} out of range for {} levels",
                    levels.len()
                )));
            }
            seen[c] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::Task(format!(
                "task `{name}`: class `{}` has no observations",
                levels[empty]
            )));
        }
        Ok(Self {
            name,
            dataset,
            target: Target::Classification { labels, levels },
        })
    }

    pub fn regression(
        name: impl Into<String>,
        dataset: FunctionalDataset,
        values: Vec<f64>,
    ) -> Result<Self> {
        let name = name.into();
        if values.len() != dataset.n_obs() {
            return Err(Error::Shape(format!(
                "task `{name}`: {} target values for {} observations",
                values.len(),
                dataset.n_obs()
            )));
        }
        Ok(Self {
            name,
            dataset,
            target: Target::Regression(values),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Same task under a different name; benchmark datasets are named by
    /// the config rather than the file stem.
    pub fn renamed(mut self, name: &str) -> Task {
        self.name = name.to_string();
        self
    }

    pub fn dataset(&self) -> &FunctionalDataset {
        &self.dataset
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn kind(&self) -> TaskKind {
        match self.target {
            Target::Classification { .. } => TaskKind::Classification,
            Target::Regression(_) => TaskKind::Regression,
        }
    }

    pub fn n_obs(&self) -> usize {
        self.dataset.n_obs()
    }

    /// Class ids; errors on regression tasks.
    pub fn class_labels(&self) -> Result<&[ClassId]> {
        match &self.target {
            Target::Classification { labels, .. } => Ok(labels),
            Target::Regression(_) => Err(Error::Task(format!(
                "task `{}` is a regression task, classification labels requested",
                self.name
            ))),
        }
    }

    pub fn class_levels(&self) -> Result<&[String]> {
        match &self.target {
            Target::Classification { levels, .. } => Ok(levels),
            Target::Regression(_) => Err(Error::Task(format!(
                "task `{}` is a regression task, class levels requested",
                self.name
            ))),
        }
    }

    pub fn n_classes(&self) -> Result<usize> {
        Ok(self.class_levels()?.len())
    }

    /// Observation count per class, indexed by class id.
    pub fn class_counts(&self) -> Result<Vec<usize>> {
        let labels = self.class_labels()?;
        let mut counts = vec![0usize; self.class_levels()?.len()];
        for &c in labels {
            counts[c] += 1;
        }
        Ok(counts)
    }
}

/// One train/test split: disjoint, non-empty index sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndex {
    train: Vec<usize>,
    test: Vec<usize>,
}

impl SplitIndex {
    /// Validate and store a split; index vectors are kept sorted.
    pub fn new(mut train: Vec<usize>, mut test: Vec<usize>, n_obs: usize) -> Result<Self> {
        if train.is_empty() || test.is_empty() {
            return Err(Error::InvalidParam(
                "split must have non-empty train and test sets".into(),
            ));
        }
        train.sort_unstable();
        test.sort_unstable();
        for part in [&train, &test] {
            if part.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParam(
                    "split contains duplicate indices".into(),
                ));
            }
            if let Some(&max) = part.last() {
                if max >= n_obs {
                    return Err(Error::InvalidParam(format!(
                        "split index {max} out of range for {n_obs} observations"
                    )));
                }
            }
        }
        let mut i = 0;
        let mut j = 0;
        while i < train.len() && j < test.len() {
            match train[i].cmp(&test[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    return Err(Error::InvalidParam(format!(
                        "index {} appears in both train and test",
                        train[i]
                    )))
                }
            }
        }
        Ok(Self { train, test })
    }

    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    /// Stable fingerprint of the index sets, used to assert that all
    /// pipelines in a benchmark saw identical splits.
    pub fn fingerprint(&self) -> u64 {
        let mut bytes = Vec::with_capacity(8 * (self.train.len() + self.test.len() + 1));
        for &i in &self.train {
            bytes.extend_from_slice(&(i as u64).to_le_bytes());
        }
        bytes.extend_from_slice(&u64::MAX.to_le_bytes());
        for &i in &self.test {
            bytes.extend_from_slice(&(i as u64).to_le_bytes());
        }
        fnv1a(&bytes)
    }
}

/// Fingerprint of a whole resampling plan.
pub fn plan_fingerprint(plan: &[SplitIndex]) -> u64 {
    let mut bytes = Vec::with_capacity(8 * plan.len());
    for s in plan {
        bytes.extend_from_slice(&s.fingerprint().to_le_bytes());
    }
    fnv1a(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn functional_feature_rejects_short_curves() {
        let m = Array2::<f64>::zeros((3, 1));
        assert!(FunctionalFeature::new("x", m).is_err());
    }

    #[test]
    fn functional_feature_rejects_nan() {
        let m = array![[1.0, f64::NAN], [0.0, 1.0]];
        let err = FunctionalFeature::new("x", m).unwrap_err();
        assert!(err.to_string().contains("row 0"));
    }

    #[test]
    fn functional_feature_rejects_bad_grid() {
        let m = Array2::<f64>::zeros((2, 3));
        assert!(FunctionalFeature::with_grid("x", m, vec![1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn dataset_rejects_duplicate_names() {
        let s = ScalarFeature {
            name: "a".into(),
            values: vec![0.0, 1.0],
        };
        let f = FunctionalFeature::new("a", Array2::zeros((2, 3))).unwrap();
        assert!(FunctionalDataset::new(vec![s], vec![f]).is_err());
    }

    #[test]
    fn dataset_rejects_row_mismatch() {
        let f1 = FunctionalFeature::new("a", Array2::zeros((2, 3))).unwrap();
        let f2 = FunctionalFeature::new("b", Array2::zeros((3, 3))).unwrap();
        assert!(FunctionalDataset::new(vec![], vec![f1, f2]).is_err());
    }

    #[test]
    fn classification_task_requires_every_class_present() {
        let f = FunctionalFeature::new("s", Array2::zeros((3, 4))).unwrap();
        let ds = FunctionalDataset::new(vec![], vec![f]).unwrap();
        let err =
            Task::classification("t", ds, vec![0, 0, 0], vec!["a".into(), "b".into()]).unwrap_err();
        assert!(err.to_string().contains('b'));
    }

    #[test]
    fn split_rejects_overlap() {
        assert!(SplitIndex::new(vec![0, 1], vec![1, 2], 3).is_err());
        assert!(SplitIndex::new(vec![0], vec![3], 3).is_err());
        assert!(SplitIndex::new(vec![], vec![0], 3).is_err());
    }

    #[test]
    fn split_fingerprint_is_order_insensitive() {
        let a = SplitIndex::new(vec![2, 0], vec![1, 3], 4).unwrap();
        let b = SplitIndex::new(vec![0, 2], vec![3, 1], 4).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
    }
}
