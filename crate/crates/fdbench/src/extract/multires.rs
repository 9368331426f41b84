//! Multi-resolution window means.
//!
//! At resolution level r = 0..res_level the window width is ceil(L / 2^r);
//! windows start at multiples of ceil(shift * width) while they fit inside
//! the curve, and each window contributes its mean (optionally also its
//! variance). Stateless: the output width depends only on (L, res_level,
//! shift).

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::FeatureBlock;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiResParams {
    pub res_level: usize,
    pub shift: f64,
    /// Also emit per-window variances. The underlying description mentions
    /// "features like mean and variance"; means alone are the default.
    pub with_variance: bool,
}

impl Default for MultiResParams {
    fn default() -> Self {
        Self {
            res_level: 3,
            shift: 0.5,
            with_variance: false,
        }
    }
}

/// (offset, width) of every window for a given curve length.
fn windows(l: usize, res_level: usize, shift: f64) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for r in 0..=res_level {
        let width = l.div_ceil(1 << r);
        let step = ((shift * width as f64).ceil() as usize).max(1);
        let mut offset = 0;
        while offset + width <= l {
            out.push((r, offset, width));
            offset += step;
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiResFitted {
    params: MultiResParams,
    input_len: usize,
}

pub fn fit(params: &MultiResParams, train: ArrayView2<f64>) -> Result<MultiResFitted> {
    let l = train.ncols();
    if params.res_level < 1 {
        return Err(Error::InvalidParam("res.level must be >= 1".into()));
    }
    if !(params.shift > 0.0 && params.shift <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "shift must be in (0,1], got {}",
            params.shift
        )));
    }
    if l < (1 << params.res_level) {
        return Err(Error::InvalidParam(format!(
            "curve length {l} shorter than 2^res.level = {}",
            1 << params.res_level
        )));
    }
    Ok(MultiResFitted {
        params: params.clone(),
        input_len: l,
    })
}

impl MultiResFitted {
    pub fn output_width(&self) -> usize {
        let n = windows(self.input_len, self.params.res_level, self.params.shift).len();
        if self.params.with_variance {
            2 * n
        } else {
            n
        }
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<FeatureBlock> {
        if x.ncols() != self.input_len {
            return Err(Error::Shape(format!(
                "multires fitted on length {}, got {}",
                self.input_len,
                x.ncols()
            )));
        }
        let wins = windows(self.input_len, self.params.res_level, self.params.shift);
        let mut names = Vec::with_capacity(self.output_width());
        for &(r, offset, _) in &wins {
            names.push(format!("mr{r}.{offset}"));
        }
        if self.params.with_variance {
            for &(r, offset, _) in &wins {
                names.push(format!("mrvar{r}.{offset}"));
            }
        }
        let mut out = Array2::<f64>::zeros((x.nrows(), names.len()));
        for (i, row) in x.rows().into_iter().enumerate() {
            for (c, &(_, offset, width)) in wins.iter().enumerate() {
                let slice = row.slice(ndarray::s![offset..offset + width]);
                let mean = slice.sum() / width as f64;
                out[[i, c]] = mean;
                if self.params.with_variance {
                    let var =
                        slice.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / width as f64;
                    out[[i, wins.len() + c]] = var;
                }
            }
        }
        Ok(FeatureBlock::new(names, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(params: &MultiResParams, x: &Array2<f64>) -> FeatureBlock {
        fit(params, x.view()).unwrap().transform(x.view()).unwrap()
    }

    #[test]
    fn level_zero_is_series_mean() {
        let x = Array2::from_shape_vec((1, 6), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let block = run(
            &MultiResParams {
                res_level: 1,
                shift: 1.0,
                with_variance: false,
            },
            &x,
        );
        assert_eq!(block.values[[0, 0]], 3.5);
    }

    #[test]
    fn constant_series_gives_constant_features() {
        let x = Array2::from_elem((2, 16), -0.75);
        let block = run(&MultiResParams::default(), &x);
        for v in block.values.iter() {
            assert!((v + 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn eight_point_layout_matches_sliding_mean_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let row: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = Array2::from_shape_vec((1, 8), row.clone()).unwrap();
        let params = MultiResParams {
            res_level: 2,
            shift: 1.0,
            with_variance: false,
        };
        let block = run(&params, &x);
        // widths {8,4,2} -> window counts {1,2,4} -> 7 features
        assert_eq!(block.values.ncols(), 7);
        let mut expected = Vec::new();
        for width in [8usize, 4, 2] {
            let mut offset = 0;
            while offset + width <= 8 {
                expected.push(row[offset..offset + width].iter().sum::<f64>() / width as f64);
                offset += width;
            }
        }
        for (c, e) in expected.iter().enumerate() {
            assert!((block.values[[0, c]] - e).abs() < 1e-12, "window {c}");
        }
    }

    #[test]
    fn too_deep_resolution_rejected() {
        let x = Array2::<f64>::zeros((1, 7));
        let params = MultiResParams {
            res_level: 3,
            shift: 0.5,
            with_variance: false,
        };
        assert!(fit(&params, x.view()).is_err());
    }

    #[test]
    fn variance_flag_doubles_width() {
        let x = Array2::from_shape_fn((1, 16), |(_, j)| j as f64);
        let base = MultiResParams::default();
        let with_var = MultiResParams {
            with_variance: true,
            ..base.clone()
        };
        let a = fit(&base, x.view()).unwrap().output_width();
        let b = fit(&with_var, x.view()).unwrap().output_width();
        assert_eq!(2 * a, b);
    }
}
