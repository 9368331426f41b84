//! Fourier coefficients of each curve via FFT.
//!
//! One-sided spectrum: coefficients k = 0..floor(L/2), so conjugate
//! duplicates are not emitted. Amplitude mode returns |c_k|, phase mode
//! atan2(Im c_k, Re c_k).

use ndarray::{Array2, ArrayView2};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::FeatureBlock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FourierCoeff {
    Phase,
    Amplitude,
}

impl std::str::FromStr for FourierCoeff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(FourierCoeff::Phase),
            "amplitude" => Ok(FourierCoeff::Amplitude),
            other => Err(Error::InvalidParam(format!(
                "unknown trafo.coeff `{other}` (expected phase or amplitude)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierParams {
    pub coeff: FourierCoeff,
}

impl Default for FourierParams {
    fn default() -> Self {
        Self {
            coeff: FourierCoeff::Amplitude,
        }
    }
}

/// Stateless transform; the fitted form only pins the input length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierFitted {
    params: FourierParams,
    input_len: usize,
}

pub fn fit(params: &FourierParams, train: ArrayView2<f64>) -> Result<FourierFitted> {
    let l = train.ncols();
    if l < 2 {
        return Err(Error::Shape(format!("fourier needs L >= 2, got {l}")));
    }
    Ok(FourierFitted {
        params: params.clone(),
        input_len: l,
    })
}

impl FourierFitted {
    pub fn output_width(&self) -> usize {
        self.input_len / 2 + 1
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<FeatureBlock> {
        let l = x.ncols();
        if l != self.input_len {
            return Err(Error::Shape(format!(
                "fourier fitted on length {}, got {l}",
                self.input_len
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("fourier: non-finite input value {v}")));
        }
        let width = self.output_width();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(l);
        let mut out = Array2::<f64>::zeros((x.nrows(), width));
        let mut buf = vec![Complex::new(0.0, 0.0); l];
        for (i, row) in x.rows().into_iter().enumerate() {
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = Complex::new(*v, 0.0);
            }
            fft.process(&mut buf);
            for k in 0..width {
                out[[i, k]] = match self.params.coeff {
                    FourierCoeff::Amplitude => buf[k].norm(),
                    FourierCoeff::Phase => buf[k].im.atan2(buf[k].re),
                };
            }
        }
        let prefix = match self.params.coeff {
            FourierCoeff::Amplitude => "amp",
            FourierCoeff::Phase => "phase",
        };
        let names = (0..width).map(|k| format!("{prefix}{k}")).collect();
        Ok(FeatureBlock::new(names, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Naive O(L^2) DFT oracle.
    fn naive_dft(row: &[f64]) -> Vec<Complex<f64>> {
        let l = row.len();
        (0..l)
            .map(|k| {
                let mut c = Complex::new(0.0, 0.0);
                for (t, &v) in row.iter().enumerate() {
                    let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / l as f64;
                    c += Complex::new(v * ang.cos(), v * ang.sin());
                }
                c
            })
            .collect()
    }

    fn transform(coeff: FourierCoeff, x: &Array2<f64>) -> Array2<f64> {
        let fitted = fit(&FourierParams { coeff }, x.view()).unwrap();
        fitted.transform(x.view()).unwrap().values
    }

    #[test]
    fn constant_row_is_dc_only() {
        let c = -1.7;
        let l = 12;
        let x = Array2::from_elem((1, l), c);
        let amps = transform(FourierCoeff::Amplitude, &x);
        assert!((amps[[0, 0]] - l as f64 * c.abs()).abs() < 1e-9);
        for k in 1..amps.ncols() {
            assert!(amps[[0, k]].abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn unit_impulse_has_flat_spectrum() {
        let x = array![[1.0, 0.0, 0.0, 0.0]];
        let raw = naive_dft(&[1.0, 0.0, 0.0, 0.0]);
        for c in &raw {
            assert!((c.re - 1.0).abs() < 1e-12 && c.im.abs() < 1e-12);
        }
        let amps = transform(FourierCoeff::Amplitude, &x);
        assert_eq!(amps.ncols(), 3);
        for k in 0..3 {
            assert!((amps[[0, k]] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let l = rng.random_range(8..=64);
            let row: Vec<f64> = (0..l).map(|_| rng.random_range(-3.0..3.0)).collect();
            let x = Array2::from_shape_vec((1, l), row.clone()).unwrap();
            let oracle = naive_dft(&row);
            let amps = transform(FourierCoeff::Amplitude, &x);
            let phases = transform(FourierCoeff::Phase, &x);
            for k in 0..=l / 2 {
                assert!((amps[[0, k]] - oracle[k].norm()).abs() < 1e-9);
                assert!((phases[[0, k]] - oracle[k].im.atan2(oracle[k].re)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn amplitudes_invariant_under_circular_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let l = rng.random_range(4..=40);
            let row: Vec<f64> = (0..l).map(|_| rng.random_range(-1.0..1.0)).collect();
            let shift = rng.random_range(1..l);
            let mut shifted = row.clone();
            shifted.rotate_left(shift);
            let a = transform(
                FourierCoeff::Amplitude,
                &Array2::from_shape_vec((1, l), row).unwrap(),
            );
            let b = transform(
                FourierCoeff::Amplitude,
                &Array2::from_shape_vec((1, l), shifted).unwrap(),
            );
            for k in 0..a.ncols() {
                assert!((a[[0, k]] - b[[0, k]]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn non_finite_input_errors() {
        let x = array![[1.0, f64::NAN, 0.0, 0.0]];
        let fitted = fit(
            &FourierParams::default(),
            array![[0.0, 0.0, 0.0, 0.0]].view(),
        )
        .unwrap();
        assert!(fitted.transform(x.view()).is_err());
    }
}
