//! CART classification trees: greedy binary splits minimizing weighted Gini
//! impurity, split candidates at midpoints of sorted unique feature values.

use ndarray::ArrayView2;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdata::ClassId;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeParams {
    /// Nodes at or below this size become leaves.
    pub min_node_size: usize,
    pub max_depth: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            min_node_size: 1,
            max_depth: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: ClassId,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeFitted {
    nodes: Vec<Node>,
    n_features: usize,
}

impl TreeFitted {
    pub fn predict_row(&self, row: &[f64]) -> ClassId {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ClassId>> {
        if x.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "tree fitted on width {}, got {}",
                self.n_features,
                x.ncols()
            )));
        }
        Ok(x.rows()
            .into_iter()
            .map(|r| self.predict_row(&r.to_vec()))
            .collect())
    }

    pub fn depth(&self) -> usize {
        fn d(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + d(nodes, *left).max(d(nodes, *right)),
            }
        }
        d(&self.nodes, 0)
    }
}

pub(crate) struct TreeBuilder<'a> {
    pub x: ArrayView2<'a, f64>,
    pub labels: &'a [ClassId],
    pub n_classes: usize,
    pub min_node_size: usize,
    pub max_depth: usize,
    /// Features considered per split; equal to the width for a plain tree.
    pub mtry: usize,
    /// Split-level feature sampling for forests; `None` uses all features.
    pub rng: Option<ChaCha8Rng>,
}

impl<'a> TreeBuilder<'a> {
    pub fn build(mut self, indices: &[usize]) -> Result<TreeFitted> {
        if indices.is_empty() {
            return Err(Error::Shape("tree fit on empty index set".into()));
        }
        let mut nodes = Vec::new();
        let mut idx = indices.to_vec();
        self.grow(&mut nodes, &mut idx, 0);
        Ok(TreeFitted {
            nodes,
            n_features: self.x.ncols(),
        })
    }

    fn class_counts(&self, indices: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &i in indices {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    fn majority(counts: &[usize]) -> ClassId {
        let mut best = 0;
        for c in 1..counts.len() {
            if counts[c] > counts[best] {
                best = c;
            }
        }
        best
    }

    fn gini(counts: &[usize], n: f64) -> f64 {
        1.0 - counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                p * p
            })
            .sum::<f64>()
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.x.ncols();
        if self.mtry >= p {
            return (0..p).collect();
        }
        let rng = self.rng.as_mut().expect("mtry < p requires an rng");
        let mut picked = rand::seq::index::sample(rng, p, self.mtry).into_vec();
        picked.sort_unstable();
        picked
    }

    /// Grow the subtree for `indices`; returns its node id.
    fn grow(&mut self, nodes: &mut Vec<Node>, indices: &mut Vec<usize>, depth: usize) -> usize {
        let counts = self.class_counts(indices);
        let majority = Self::majority(&counts);
        let n = indices.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || n <= self.min_node_size {
            nodes.push(Node::Leaf { class: majority });
            return nodes.len() - 1;
        }

        // best split over candidate features: lowest weighted child Gini,
        // first feature then lowest threshold on ties
        let mut best: Option<(f64, usize, f64)> = None;
        let features = self.candidate_features();
        for &f in &features {
            let mut pairs: Vec<(f64, ClassId)> = indices
                .iter()
                .map(|&i| (self.x[[i, f]], self.labels[i]))
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut left = vec![0usize; self.n_classes];
            let mut right = counts.clone();
            for i in 0..n - 1 {
                left[pairs[i].1] += 1;
                right[pairs[i].1] -= 1;
                if pairs[i + 1].0 <= pairs[i].0 {
                    continue;
                }
                let nl = (i + 1) as f64;
                let nr = (n - i - 1) as f64;
                let w = (nl * Self::gini(&left, nl) + nr * Self::gini(&right, nr)) / n as f64;
                let threshold = 0.5 * (pairs[i].0 + pairs[i + 1].0);
                if best.map_or(true, |(bw, _, _)| w < bw - 1e-15) {
                    best = Some((w, f, threshold));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            // all candidate features constant on this node
            nodes.push(Node::Leaf { class: majority });
            return nodes.len() - 1;
        };

        let (mut li, mut ri): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| self.x[[i, feature]] <= threshold);
        let placeholder = nodes.len();
        nodes.push(Node::Leaf { class: majority });
        let left = self.grow(nodes, &mut li, depth + 1);
        let right = self.grow(nodes, &mut ri, depth + 1);
        nodes[placeholder] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        placeholder
    }
}

pub fn fit(
    params: &TreeParams,
    x: ArrayView2<f64>,
    labels: &[ClassId],
    n_classes: usize,
) -> Result<TreeFitted> {
    if labels.len() != x.nrows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            x.nrows()
        )));
    }
    if params.max_depth == 0 {
        return Err(Error::InvalidParam("max_depth must be >= 1".into()));
    }
    let indices: Vec<usize> = (0..x.nrows()).collect();
    TreeBuilder {
        x,
        labels,
        n_classes,
        min_node_size: params.min_node_size.max(1),
        max_depth: params.max_depth,
        mtry: x.ncols(),
        rng: None,
    }
    .build(&indices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_threshold_separates_sign() {
        let x = array![[-2.0], [-1.0], [-0.5], [0.5], [1.0], [2.0]];
        let labels = vec![0, 0, 0, 1, 1, 1];
        let t = fit(&TreeParams::default(), x.view(), &labels, 2).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict(x.view()).unwrap(), labels);
    }

    #[test]
    fn pure_root_stays_a_leaf() {
        let x = array![[1.0], [2.0], [3.0]];
        let t = fit(&TreeParams::default(), x.view(), &[1, 1, 1], 2).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.predict(array![[9.0]].view()).unwrap(), vec![1]);
    }

    #[test]
    fn xor_needs_depth_two() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let labels = vec![0, 1, 1, 0];

        // Exhaustive oracle over depth-1 trees: a single split on either
        // feature leaves both leaves mixed, so accuracy is at most 0.75.
        let mut best_depth1 = 0.0f64;
        for f in 0..2 {
            for cut in [0.5] {
                for (l_class, r_class) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let acc = (0..4)
                        .filter(|&i| {
                            let pred = if x[[i, f]] <= cut { l_class } else { r_class };
                            pred == labels[i]
                        })
                        .count() as f64
                        / 4.0;
                    best_depth1 = best_depth1.max(acc);
                }
            }
        }
        assert!(best_depth1 <= 0.75);

        let shallow = fit(
            &TreeParams {
                min_node_size: 1,
                max_depth: 1,
            },
            x.view(),
            &labels,
            2,
        )
        .unwrap();
        let acc1 = shallow
            .predict(x.view())
            .unwrap()
            .iter()
            .zip(&labels)
            .filter(|(a, b)| a == b)
            .count() as f64
            / 4.0;
        assert!(acc1 <= 0.75, "depth-1 accuracy {acc1}");

        let deep = fit(
            &TreeParams {
                min_node_size: 1,
                max_depth: 2,
            },
            x.view(),
            &labels,
            2,
        )
        .unwrap();
        assert_eq!(deep.predict(x.view()).unwrap(), labels);
    }

    #[test]
    fn training_predictions_invariant_under_monotone_feature_transform() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let x = Array2::from_shape_fn((30, 3), |_| rng.random_range(-2.0..2.0));
        let labels: Vec<usize> = (0..30).map(|_| rng.random_range(0..2)).collect();
        let base = fit(&TreeParams::default(), x.view(), &labels, 2).unwrap();
        let base_pred = base.predict(x.view()).unwrap();

        // transform one column with a strictly increasing map
        for col in 0..3 {
            let mut tx = x.clone();
            for i in 0..30 {
                tx[[i, col]] = (tx[[i, col]]).exp() + 3.0 * tx[[i, col]];
            }
            let t = fit(&TreeParams::default(), tx.view(), &labels, 2).unwrap();
            assert_eq!(t.predict(tx.view()).unwrap(), base_pred, "column {col}");
        }
    }
}
