//! Minimal per-curve summary statistics: mean, standard deviation, min,
//! max, lag-1..3 autocorrelations and the linear-trend slope.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::FeatureBlock;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TsfeatParams {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TsfeatFitted {
    input_len: usize,
}

pub fn fit(_params: &TsfeatParams, train: ArrayView2<f64>) -> Result<TsfeatFitted> {
    let l = train.ncols();
    if l < 4 {
        return Err(Error::Shape(format!("tsfeat needs L >= 4, got {l}")));
    }
    Ok(TsfeatFitted { input_len: l })
}

pub const FEATURE_NAMES: [&str; 8] = ["mean", "sd", "min", "max", "acf1", "acf2", "acf3", "slope"];

/// Sample autocorrelation at the given lag; 0 for zero-variance rows.
fn autocorrelation(row: &[f64], mean: f64, lag: usize) -> f64 {
    let denom: f64 = row.iter().map(|v| (v - mean) * (v - mean)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = (0..row.len() - lag)
        .map(|t| (row[t] - mean) * (row[t + lag] - mean))
        .sum();
    num / denom
}

impl TsfeatFitted {
    pub fn output_width(&self) -> usize {
        FEATURE_NAMES.len()
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<FeatureBlock> {
        let l = x.ncols();
        if l != self.input_len {
            return Err(Error::Shape(format!(
                "tsfeat fitted on length {}, got {l}",
                self.input_len
            )));
        }
        let mut out = Array2::<f64>::zeros((x.nrows(), FEATURE_NAMES.len()));
        for (i, row) in x.rows().into_iter().enumerate() {
            let row = row.to_vec();
            let n = l as f64;
            let mean = row.iter().sum::<f64>() / n;
            let ss: f64 = row.iter().map(|v| (v - mean) * (v - mean)).sum();
            let sd = (ss / (n - 1.0)).sqrt();
            if sd == 0.0 {
                log::debug!("tsfeat: zero-variance row {i}, autocorrelations set to 0");
            }
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            // OLS slope on the index 0..L-1
            let t_mean = (n - 1.0) / 2.0;
            let t_ss: f64 = (0..l).map(|t| (t as f64 - t_mean).powi(2)).sum();
            let slope = (0..l)
                .map(|t| (t as f64 - t_mean) * (row[t] - mean))
                .sum::<f64>()
                / t_ss;
            out[[i, 0]] = mean;
            out[[i, 1]] = sd;
            out[[i, 2]] = min;
            out[[i, 3]] = max;
            out[[i, 4]] = autocorrelation(&row, mean, 1);
            out[[i, 5]] = autocorrelation(&row, mean, 2);
            out[[i, 6]] = autocorrelation(&row, mean, 3);
            out[[i, 7]] = slope;
        }
        let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
        Ok(FeatureBlock::new(names, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(x: &Array2<f64>) -> Array2<f64> {
        fit(&TsfeatParams::default(), x.view())
            .unwrap()
            .transform(x.view())
            .unwrap()
            .values
    }

    #[test]
    fn constant_series_degenerates_to_zero() {
        let x = Array2::from_elem((1, 10), 4.0);
        let f = run(&x);
        assert_eq!(f[[0, 0]], 4.0); // mean
        assert_eq!(f[[0, 1]], 0.0); // sd
        for k in 4..8 {
            assert_eq!(f[[0, k]], 0.0, "feature {k}");
        }
    }

    #[test]
    fn exact_line() {
        let x = array![[1.0, 2.0, 3.0, 4.0]];
        let f = run(&x);
        assert!((f[[0, 0]] - 2.5).abs() < 1e-15); // mean
        assert!((f[[0, 7]] - 1.0).abs() < 1e-12); // slope per index step
        assert_eq!(f[[0, 2]], 1.0);
        assert_eq!(f[[0, 3]], 4.0);
    }

    #[test]
    fn lag1_matches_direct_acf_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        // AR(1)-like series
        let mut v = vec![0.0; 64];
        for t in 1..64 {
            v[t] = 0.8 * v[t - 1] + rng.random_range(-0.5..0.5);
        }
        let x = Array2::from_shape_vec((1, 64), v.clone()).unwrap();
        let f = run(&x);
        let mean = v.iter().sum::<f64>() / 64.0;
        let denom: f64 = v.iter().map(|a| (a - mean) * (a - mean)).sum();
        for lag in 1..=3 {
            let num: f64 = (0..64 - lag)
                .map(|t| (v[t] - mean) * (v[t + lag] - mean))
                .sum();
            assert!((f[[0, 3 + lag]] - num / denom).abs() < 1e-9, "lag {lag}");
        }
    }

    #[test]
    fn short_series_rejected() {
        let x = Array2::<f64>::zeros((1, 3));
        assert!(fit(&TsfeatParams::default(), x.view()).is_err());
    }
}
