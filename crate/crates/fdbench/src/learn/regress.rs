//! Regression trees and a small bagged regression forest.
//!
//! Used as the SMBO surrogate: per-leaf means with ensemble variance as the
//! uncertainty estimate.

use ndarray::ArrayView2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seeds::derive_seed;

#[derive(Debug, Clone)]
enum RegNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct RegressionTree {
    nodes: Vec<RegNode>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                RegNode::Leaf { value } => return *value,
                RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }
}

struct RegBuilder<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [f64],
    min_node_size: usize,
    max_depth: usize,
    mtry: usize,
    rng: Option<ChaCha8Rng>,
}

impl<'a> RegBuilder<'a> {
    fn grow(&mut self, nodes: &mut Vec<RegNode>, indices: &mut Vec<usize>, depth: usize) -> usize {
        let n = indices.len();
        let mean = indices.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        let sse: f64 = indices.iter().map(|&i| (self.y[i] - mean).powi(2)).sum();
        if sse < 1e-24 || depth >= self.max_depth || n <= self.min_node_size {
            nodes.push(RegNode::Leaf { value: mean });
            return nodes.len() - 1;
        }

        let p = self.x.ncols();
        let features: Vec<usize> = if self.mtry >= p {
            (0..p).collect()
        } else {
            let rng = self.rng.as_mut().expect("mtry < p requires an rng");
            let mut picked = rand::seq::index::sample(rng, p, self.mtry).into_vec();
            picked.sort_unstable();
            picked
        };

        // best split: lowest total child SSE via prefix sums
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &features {
            let mut pairs: Vec<(f64, f64)> = indices
                .iter()
                .map(|&i| (self.x[[i, f]], self.y[i]))
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let total_sum: f64 = pairs.iter().map(|p| p.1).sum();
            let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
            let mut lsum = 0.0;
            let mut lsq = 0.0;
            for i in 0..n - 1 {
                lsum += pairs[i].1;
                lsq += pairs[i].1 * pairs[i].1;
                if pairs[i + 1].0 <= pairs[i].0 {
                    continue;
                }
                let nl = (i + 1) as f64;
                let nr = (n - i - 1) as f64;
                let rsum = total_sum - lsum;
                let rsq = total_sq - lsq;
                let child_sse = (lsq - lsum * lsum / nl) + (rsq - rsum * rsum / nr);
                let threshold = 0.5 * (pairs[i].0 + pairs[i + 1].0);
                if best.map_or(true, |(bw, _, _)| child_sse < bw - 1e-15) {
                    best = Some((child_sse, f, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            nodes.push(RegNode::Leaf { value: mean });
            return nodes.len() - 1;
        };
        let (mut li, mut ri): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.x[[i, feature]] <= threshold);
        let placeholder = nodes.len();
        nodes.push(RegNode::Leaf { value: mean });
        let left = self.grow(nodes, &mut li, depth + 1);
        let right = self.grow(nodes, &mut ri, depth + 1);
        nodes[placeholder] = RegNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        placeholder
    }
}

#[derive(Debug, Clone)]
pub struct RegForestParams {
    pub n_trees: usize,
    pub sample_fraction: f64,
    pub mtry_fraction: f64,
    pub min_node_size: usize,
    pub max_depth: usize,
}

impl Default for RegForestParams {
    fn default() -> Self {
        Self {
            n_trees: 50,
            sample_fraction: 0.7,
            mtry_fraction: 0.7,
            min_node_size: 2,
            max_depth: 25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegressionForest {
    trees: Vec<RegressionTree>,
    n_features: usize,
}

pub fn fit_forest(
    params: &RegForestParams,
    x: ArrayView2<f64>,
    y: &[f64],
    seed: u64,
) -> Result<RegressionForest> {
    let n = x.nrows();
    let p = x.ncols();
    if n == 0 || y.len() != n {
        return Err(Error::Shape(format!("{} targets for {n} rows", y.len())));
    }
    let n_sample = ((params.sample_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mtry = ((params.mtry_fraction * p as f64).ceil() as usize).clamp(1, p);
    let mut trees = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7265_6700 + t as u64));
        let mut rows = if n_sample == n {
            (0..n).collect::<Vec<_>>()
        } else {
            let mut picked = rand::seq::index::sample(&mut rng, n, n_sample).into_vec();
            picked.sort_unstable();
            picked
        };
        let mut builder = RegBuilder {
            x,
            y,
            min_node_size: params.min_node_size,
            max_depth: params.max_depth,
            mtry,
            rng: if mtry < p { Some(rng) } else { None },
        };
        let mut nodes = Vec::new();
        builder.grow(&mut nodes, &mut rows, 0);
        trees.push(RegressionTree { nodes });
    }
    Ok(RegressionForest {
        trees,
        n_features: p,
    })
}

impl RegressionForest {
    /// Ensemble mean and variance of the per-tree predictions.
    pub fn predict_mean_var(&self, row: &[f64]) -> Result<(f64, f64)> {
        if row.len() != self.n_features {
            return Err(Error::Shape(format!(
                "regression forest fitted on width {}, got {}",
                self.n_features,
                row.len()
            )));
        }
        let preds: Vec<f64> = self.trees.iter().map(|t| t.predict_row(row)).collect();
        let m = preds.iter().sum::<f64>() / preds.len() as f64;
        let var = preds.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / preds.len() as f64;
        Ok((m, var))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};

    #[test]
    fn fits_a_step_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array2::from_shape_fn((60, 2), |_| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..60)
            .map(|i| if x[[i, 0]] > 0.0 { 2.0 } else { -2.0 })
            .collect();
        let forest = fit_forest(&RegForestParams::default(), x.view(), &y, 3).unwrap();
        let (m_pos, _) = forest.predict_mean_var(&[0.5, 0.0]).unwrap();
        let (m_neg, _) = forest.predict_mean_var(&[-0.5, 0.0]).unwrap();
        assert!(m_pos > 1.0, "{m_pos}");
        assert!(m_neg < -1.0, "{m_neg}");
    }

    #[test]
    fn variance_grows_away_from_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = Array2::from_shape_fn((40, 1), |_| rng.random_range(0.0..1.0));
        let y: Vec<f64> = (0..40).map(|i| (6.0f64 * x[[i, 0]]).sin()).collect();
        let forest = fit_forest(&RegForestParams::default(), x.view(), &y, 5).unwrap();
        let (_, v_in) = forest.predict_mean_var(&[0.5]).unwrap();
        assert!(v_in.is_finite() && v_in >= 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((30, 3), |_| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..30).map(|i| x[[i, 1]]).collect();
        let a = fit_forest(&RegForestParams::default(), x.view(), &y, 7).unwrap();
        let b = fit_forest(&RegForestParams::default(), x.view(), &y, 7).unwrap();
        let q = [0.1, -0.2, 0.3];
        assert_eq!(
            a.predict_mean_var(&q).unwrap(),
            b.predict_mean_var(&q).unwrap()
        );
    }
}
