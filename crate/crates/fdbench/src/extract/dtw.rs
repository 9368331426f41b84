//! Dynamic time warping and the DTW-distance feature extractor.
//!
//! Exact dynamic programming with squared-difference local cost, symmetric
//! steps {(1,0),(0,1),(1,1)} and a Sakoe-Chiba band; the returned distance
//! is the square root of the accumulated cost.

use ndarray::{Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::FeatureBlock;

/// Sakoe-Chiba half-width for a window fraction and series length:
/// `max(1, ceil(window * len))`.
pub fn band_half_width(window: f64, len: usize) -> usize {
    ((window * len as f64).ceil() as usize).max(1)
}

/// Banded DTW distance between two series.
///
/// `window` is the band half-width as a fraction of the longer length;
/// `window = 1.0` is unconstrained. Errors when the band cannot reach the
/// opposite corner (only possible for unequal lengths).
pub fn dtw_distance(a: &[f64], b: &[f64], window: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Shape("dtw: empty series".into()));
    }
    if !(0.0..=1.0).contains(&window) {
        return Err(Error::InvalidParam(format!(
            "dtw window must be in [0,1], got {window}"
        )));
    }
    let (la, lb) = (a.len(), b.len());
    let w = band_half_width(window, la.max(lb));
    if la.abs_diff(lb) > w {
        return Err(Error::InvalidParam(format!(
            "dtw band half-width {w} cannot align lengths {la} and {lb}"
        )));
    }

    const INF: f64 = f64::INFINITY;
    let mut prev = vec![INF; lb + 1];
    let mut curr = vec![INF; lb + 1];
    prev[0] = 0.0;
    for i in 1..=la {
        curr.fill(INF);
        let lo = i.saturating_sub(w).max(1);
        let hi = (i + w).min(lb);
        for j in lo..=hi {
            let d = a[i - 1] - b[j - 1];
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = d * d + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    let total = prev[lb];
    if !total.is_finite() {
        return Err(Error::InvalidParam(
            "dtw band produced no feasible alignment".into(),
        ));
    }
    Ok(total.sqrt())
}

/// How reference curves are chosen at fit time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefMethod {
    Random,
    All,
}

impl std::str::FromStr for RefMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(RefMethod::Random),
            "all" => Ok(RefMethod::All),
            other => Err(Error::InvalidParam(format!(
                "unknown ref.method `{other}` (expected random or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DtwKernelParams {
    pub ref_method: RefMethod,
    /// Fraction of training rows used as references under `random`.
    pub n_refs: f64,
    /// Sakoe-Chiba band fraction.
    pub window: f64,
    /// Z-normalize each row before computing distances. The underlying
    /// method leaves this unspecified; raw curves are the default.
    pub znorm: bool,
}

impl Default for DtwKernelParams {
    fn default() -> Self {
        Self {
            ref_method: RefMethod::Random,
            n_refs: 0.1,
            window: 1.0,
            znorm: false,
        }
    }
}

/// Fitted state: the selected reference curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DtwKernelFitted {
    params: DtwKernelParams,
    refs: Array2<f64>,
    input_len: usize,
}

pub fn fit(params: &DtwKernelParams, train: ArrayView2<f64>, seed: u64) -> Result<DtwKernelFitted> {
    let n = train.nrows();
    if n == 0 {
        return Err(Error::Shape("dtwkernel: empty training set".into()));
    }
    if !(params.n_refs > 0.0 && params.n_refs <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "n.refs must be in (0,1], got {}",
            params.n_refs
        )));
    }
    if !(0.0..=1.0).contains(&params.window) {
        return Err(Error::InvalidParam(format!(
            "dtwwindow must be in [0,1], got {}",
            params.window
        )));
    }
    let refs = match params.ref_method {
        RefMethod::All => train.to_owned(),
        RefMethod::Random => {
            let m = ((params.n_refs * n as f64).ceil() as usize).clamp(1, n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, n, m).into_vec();
            idx.sort_unstable();
            train.select(Axis(0), &idx)
        }
    };
    Ok(DtwKernelFitted {
        params: params.clone(),
        refs,
        input_len: train.ncols(),
    })
}

fn znorm_row(row: &[f64]) -> Vec<f64> {
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd > 0.0 {
        row.iter().map(|v| (v - mean) / sd).collect()
    } else {
        row.iter().map(|v| v - mean).collect()
    }
}

impl DtwKernelFitted {
    pub fn output_width(&self) -> usize {
        self.refs.nrows()
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<FeatureBlock> {
        if x.ncols() != self.input_len {
            return Err(Error::Shape(format!(
                "dtwkernel fitted on length {}, got {}",
                self.input_len,
                x.ncols()
            )));
        }
        let m = self.refs.nrows();
        let refs: Vec<Vec<f64>> = self
            .refs
            .rows()
            .into_iter()
            .map(|r| {
                let v = r.to_vec();
                if self.params.znorm {
                    znorm_row(&v)
                } else {
                    v
                }
            })
            .collect();
        let mut out = Array2::<f64>::zeros((x.nrows(), m));
        for (i, row) in x.rows().into_iter().enumerate() {
            let q = row.to_vec();
            let q = if self.params.znorm { znorm_row(&q) } else { q };
            for (r, rf) in refs.iter().enumerate() {
                out[[i, r]] = dtw_distance(&q, rf, self.params.window)?;
            }
        }
        let names = (1..=m).map(|r| format!("dtwref{r}")).collect();
        Ok(FeatureBlock::new(names, out))
    }
}
