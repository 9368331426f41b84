//! Principal component scores.
//!
//! Fit centers columns on the training rows and keeps the top-rank
//! eigenvectors of the training covariance; transform centers new rows by
//! the stored means and projects. Scores are ordered by decreasing
//! eigenvalue with a deterministic sign convention.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::FeatureBlock;
use crate::linalg::symmetric_eigen;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaParams {
    pub rank: usize,
}

impl Default for PcaParams {
    fn default() -> Self {
        Self { rank: 4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaFitted {
    rank: usize,
    means: Array1<f64>,
    /// L x rank matrix of component column vectors.
    components: Array2<f64>,
    eigenvalues: Vec<f64>,
    input_len: usize,
}

pub fn fit(params: &PcaParams, train: ArrayView2<f64>) -> Result<PcaFitted> {
    let n = train.nrows();
    let l = train.ncols();
    if n < 2 {
        return Err(Error::Shape("pca needs at least 2 training rows".into()));
    }
    let max_rank = (n - 1).min(l);
    if params.rank < 1 || params.rank > max_rank {
        return Err(Error::InvalidParam(format!(
            "pca rank {} outside [1, {max_rank}] for {n} rows of length {l}",
            params.rank
        )));
    }
    let means = train.mean_axis(ndarray::Axis(0)).expect("non-empty");
    let centered = &train - &means;
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    let (vals, vecs) = symmetric_eigen(&cov)?;
    let mut components = Array2::<f64>::zeros((l, params.rank));
    for k in 0..params.rank {
        // deterministic sign: largest-magnitude loading is positive
        let col = vecs.column(k);
        let mut pivot = 0;
        for i in 1..l {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..l {
            components[[i, k]] = sign * col[i];
        }
    }
    Ok(PcaFitted {
        rank: params.rank,
        means,
        components,
        eigenvalues: vals[..params.rank].to_vec(),
        input_len: l,
    })
}

impl PcaFitted {
    pub fn output_width(&self) -> usize {
        self.rank
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<FeatureBlock> {
        if x.ncols() != self.input_len {
            return Err(Error::Shape(format!(
                "pca fitted on length {}, got {}",
                self.input_len,
                x.ncols()
            )));
        }
        let centered = &x - &self.means;
        let scores = centered.dot(&self.components);
        let names = (1..=self.rank).map(|k| format!("pc{k}")).collect();
        Ok(FeatureBlock::new(names, scores))
    }

    /// Back-projection of one score row onto the curve space.
    pub fn reconstruct(&self, scores: &[f64]) -> Result<Vec<f64>> {
        if scores.len() != self.rank {
            return Err(Error::Shape(format!(
                "pca reconstruct: {} scores for rank {}",
                scores.len(),
                self.rank
            )));
        }
        let mut curve = self.means.to_vec();
        for (k, &s) in scores.iter().enumerate() {
            for (i, c) in curve.iter_mut().enumerate() {
                *c += s * self.components[[i, k]];
            }
        }
        Ok(curve)
    }
}
