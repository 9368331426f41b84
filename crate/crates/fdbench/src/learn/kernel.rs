//! Nonparametric kernel classifier: Gaussian-weighted class scores over
//! semimetric distances to the training set.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdata::ClassId;
use crate::learn::Semimetric;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelNpParams {
    /// Absolute distance scale of the Gaussian kernel.
    pub bandwidth: f64,
    pub metric: Semimetric,
}

impl Default for KernelNpParams {
    fn default() -> Self {
        Self {
            bandwidth: 1.0,
            metric: Semimetric::Euclidean,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelNpFitted {
    params: KernelNpParams,
    train: Array2<f64>,
    labels: Vec<ClassId>,
    n_classes: usize,
}

pub fn fit(
    params: &KernelNpParams,
    x: ArrayView2<f64>,
    labels: &[ClassId],
    n_classes: usize,
) -> Result<KernelNpFitted> {
    if !(params.bandwidth > 0.0) {
        return Err(Error::InvalidParam(format!(
            "bandwidth must be positive, got {}",
            params.bandwidth
        )));
    }
    if labels.len() != x.nrows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            x.nrows()
        )));
    }
    Ok(KernelNpFitted {
        params: params.clone(),
        train: x.to_owned(),
        labels: labels.to_vec(),
        n_classes,
    })
}

impl KernelNpFitted {
    /// Per-class kernel scores for one query row.
    pub fn scores(&self, q: &[f64]) -> Result<Vec<f64>> {
        let mut scores = vec![0.0f64; self.n_classes];
        for (i, t) in self.train.rows().into_iter().enumerate() {
            let d = self.params.metric.distance(q, &t.to_vec())?;
            let u = d / self.params.bandwidth;
            scores[self.labels[i]] += (-0.5 * u * u).exp();
        }
        Ok(scores)
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ClassId>> {
        if x.ncols() != self.train.ncols() {
            return Err(Error::Shape(format!(
                "kernel_np fitted on width {}, got {}",
                self.train.ncols(),
                x.ncols()
            )));
        }
        let mut out = Vec::with_capacity(x.nrows());
        for row in x.rows() {
            let q = row.to_vec();
            let scores = self.scores(&q)?;
            let total: f64 = scores.iter().sum();
            if total == 0.0 {
                // every weight underflowed; fall back to 1-NN
                let mut best = (f64::INFINITY, 0usize);
                for (i, t) in self.train.rows().into_iter().enumerate() {
                    let d = self.params.metric.distance(&q, &t.to_vec())?;
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                out.push(self.labels[best.1]);
                continue;
            }
            let mut best = 0;
            for c in 1..self.n_classes {
                if scores[c] > scores[best] {
                    best = c;
                }
            }
            out.push(best);
        }
        Ok(out)
    }
}
