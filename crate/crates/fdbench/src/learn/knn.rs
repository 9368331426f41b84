//! k-nearest-neighbor classification under a semimetric.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdata::ClassId;
use crate::learn::Semimetric;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub metric: Semimetric,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            k: 1,
            metric: Semimetric::Euclidean,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnFitted {
    params: KnnParams,
    train: Array2<f64>,
    labels: Vec<ClassId>,
    n_classes: usize,
}

pub fn fit(
    params: &KnnParams,
    x: ArrayView2<f64>,
    labels: &[ClassId],
    n_classes: usize,
) -> Result<KnnFitted> {
    if params.k == 0 {
        return Err(Error::InvalidParam("knn k must be >= 1".into()));
    }
    if params.k > x.nrows() {
        return Err(Error::InvalidParam(format!(
            "knn k = {} exceeds {} training rows",
            params.k,
            x.nrows()
        )));
    }
    if labels.len() != x.nrows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            x.nrows()
        )));
    }
    Ok(KnnFitted {
        params: params.clone(),
        train: x.to_owned(),
        labels: labels.to_vec(),
        n_classes,
    })
}

impl KnnFitted {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ClassId>> {
        if x.ncols() != self.train.ncols() {
            return Err(Error::Shape(format!(
                "knn fitted on width {}, got {}",
                self.train.ncols(),
                x.ncols()
            )));
        }
        let mut out = Vec::with_capacity(x.nrows());
        for row in x.rows() {
            let q = row.to_vec();
            // distance ties break on the lower training index
            let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.train.nrows());
            for (i, t) in self.train.rows().into_iter().enumerate() {
                dist.push((self.params.metric.distance(&q, &t.to_vec())?, i));
            }
            dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let neighbors = &dist[..self.params.k];

            let mut votes = vec![0usize; self.n_classes];
            let mut summed = vec![0.0f64; self.n_classes];
            for &(d, i) in neighbors {
                votes[self.labels[i]] += 1;
                summed[self.labels[i]] += d;
            }
            // majority vote; vote ties by smaller summed distance, then by
            // label order (= class id order)
            let mut best: ClassId = 0;
            let mut found = false;
            for c in 0..self.n_classes {
                if votes[c] == 0 {
                    continue;
                }
                if !found
                    || votes[c] > votes[best]
                    || (votes[c] == votes[best] && summed[c] < summed[best])
                {
                    best = c;
                    found = true;
                }
            }
            out.push(best);
        }
        Ok(out)
    }
}
