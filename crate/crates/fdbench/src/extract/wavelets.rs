//! Full-depth discrete wavelet transform features.
//!
//! Rows are padded to the next power of two by the boundary rule, then run
//! through the filter-bank pyramid to depth log2(P). Output is every detail
//! level (finest first) followed by the final approximation, so the width
//! equals the padded length. The periodic mode folds the filter circularly
//! at each level, which keeps the transform orthonormal.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::FeatureBlock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFilter {
    Haar,
    D4,
    D8,
}

impl WaveletFilter {
    /// Orthonormal scaling (low-pass) coefficients.
    pub fn lowpass(&self) -> Vec<f64> {
        let s2 = std::f64::consts::SQRT_2;
        match self {
            WaveletFilter::Haar => vec![1.0 / s2, 1.0 / s2],
            WaveletFilter::D4 => {
                let s3 = 3f64.sqrt();
                let d = 4.0 * s2;
                vec![
                    (1.0 + s3) / d,
                    (3.0 + s3) / d,
                    (3.0 - s3) / d,
                    (1.0 - s3) / d,
                ]
            }
            // Published 8-tap Daubechies extremal-phase coefficients.
            WaveletFilter::D8 => vec![
                0.230_377_813_308_855_23,
                0.714_846_570_552_541_5,
                0.630_880_767_929_590_4,
                -0.027_983_769_416_983_85,
                -0.187_034_811_718_881_14,
                0.030_841_381_835_986_965,
                0.032_883_011_666_982_945,
                -0.010_597_401_784_997_278,
            ],
        }
    }

    /// Quadrature-mirror high-pass: g_k = (-1)^k h_{M-1-k}.
    pub fn highpass(&self) -> Vec<f64> {
        let h = self.lowpass();
        let m = h.len();
        (0..m)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * h[m - 1 - k]
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        match self {
            WaveletFilter::Haar => 2,
            WaveletFilter::D4 => 4,
            WaveletFilter::D8 => 8,
        }
    }
}

impl std::str::FromStr for WaveletFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(WaveletFilter::Haar),
            "d4" => Ok(WaveletFilter::D4),
            "d8" => Ok(WaveletFilter::D8),
            other => Err(Error::InvalidParam(format!(
                "unsupported wavelet filter `{other}` (implemented: haar, d4, d8)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Reflection,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "reflection" => Ok(Boundary::Reflection),
            other => Err(Error::InvalidParam(format!(
                "unknown boundary `{other}` (expected periodic or reflection)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveletParams {
    pub filter: WaveletFilter,
    pub boundary: Boundary,
}

impl Default for WaveletParams {
    fn default() -> Self {
        Self {
            filter: WaveletFilter::Haar,
            boundary: Boundary::Periodic,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveletFitted {
    params: WaveletParams,
    input_len: usize,
    padded_len: usize,
}

pub fn fit(params: &WaveletParams, train: ArrayView2<f64>) -> Result<WaveletFitted> {
    let l = train.ncols();
    if l < params.filter.len() {
        return Err(Error::Shape(format!(
            "wavelets: curve length {l} shorter than filter length {}",
            params.filter.len()
        )));
    }
    Ok(WaveletFitted {
        params: params.clone(),
        input_len: l,
        padded_len: l.next_power_of_two(),
    })
}

/// Map an out-of-range index into [0, m) by the boundary rule
/// (half-sample symmetric reflection, period 2m).
fn bounded(idx: usize, m: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Periodic => idx % m,
        Boundary::Reflection => {
            let r = idx % (2 * m);
            if r < m {
                r
            } else {
                2 * m - 1 - r
            }
        }
    }
}

/// One analysis step: length-m signal -> (approximation, detail) of m/2.
fn analysis_step(
    signal: &[f64],
    low: &[f64],
    high: &[f64],
    boundary: Boundary,
) -> (Vec<f64>, Vec<f64>) {
    let m = signal.len();
    let half = m / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for i in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (k, (&h, &g)) in low.iter().zip(high.iter()).enumerate() {
            let v = signal[bounded(2 * i + k, m, boundary)];
            a += h * v;
            d += g * v;
        }
        approx[i] = a;
        detail[i] = d;
    }
    (approx, detail)
}

impl WaveletFitted {
    pub fn output_width(&self) -> usize {
        self.padded_len
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<FeatureBlock> {
        if x.ncols() != self.input_len {
            return Err(Error::Shape(format!(
                "wavelets fitted on length {}, got {}",
                self.input_len,
                x.ncols()
            )));
        }
        let low = self.params.filter.lowpass();
        let high = self.params.filter.highpass();
        let p = self.padded_len;
        let levels = p.trailing_zeros() as usize;

        let mut out = Array2::<f64>::zeros((x.nrows(), p));
        let mut names: Option<Vec<String>> = None;
        for (r, row) in x.rows().into_iter().enumerate() {
            // Pad to the next power of two by the boundary rule.
            let mut signal: Vec<f64> = (0..p)
                .map(|t| row[bounded(t, self.input_len, self.params.boundary)])
                .collect();
            let mut col = 0;
            let mut level_names = Vec::new();
            for level in 1..=levels {
                let (approx, detail) = analysis_step(&signal, &low, &high, self.params.boundary);
                for (i, &d) in detail.iter().enumerate() {
                    out[[r, col]] = d;
                    col += 1;
                    if names.is_none() {
                        level_names.push(format!("d{level}.{i}"));
                    }
                }
                signal = approx;
            }
            for (i, &a) in signal.iter().enumerate() {
                out[[r, col]] = a;
                col += 1;
                if names.is_none() {
                    level_names.push(format!("a{levels}.{i}"));
                }
            }
            debug_assert_eq!(col, p);
            if names.is_none() {
                names = Some(level_names);
            }
        }
        let names = names.unwrap_or_default();
        Ok(FeatureBlock::new(names, out))
    }
}
