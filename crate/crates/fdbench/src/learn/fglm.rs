//! Penalized functional GLM: bsignal basis expansion of the input block
//! followed by ridge-penalized logistic regression fitted by IRLS.
//! Multiclass targets are handled one-vs-all.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::bsignal::{self, BsignalFitted, BsignalParams};
use crate::fdata::ClassId;
use crate::linalg::solve_spd;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FglmParams {
    /// Interior knots of the basis expansion.
    pub knots: usize,
    /// Effective degrees of freedom passed to the basis expansion.
    pub df: f64,
    /// Ridge penalty on the logistic coefficients (intercept unpenalized).
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FglmParams {
    fn default() -> Self {
        Self {
            knots: 10,
            df: 3.0,
            lambda: 1e-3,
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FglmFitted {
    params: FglmParams,
    basis: BsignalFitted,
    /// One coefficient vector (intercept first) per one-vs-all problem;
    /// a single vector for binary targets.
    coefficients: Vec<Vec<f64>>,
    n_classes: usize,
    input_len: usize,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn deviance(y: &[f64], p: &[f64]) -> f64 {
    let mut d = 0.0;
    for (yi, pi) in y.iter().zip(p) {
        let pi = pi.clamp(1e-12, 1.0 - 1e-12);
        d -= 2.0 * (yi * pi.ln() + (1.0 - yi) * (1.0 - pi).ln());
    }
    d
}

/// Ridge-penalized IRLS for one binary problem on the design `z` (without
/// intercept column). Returns intercept-first coefficients.
fn irls(z: &Array2<f64>, y: &[f64], lambda: f64, max_iter: usize, tol: f64) -> Result<Vec<f64>> {
    let n = z.nrows();
    let k = z.ncols() + 1;
    let mut design = Array2::<f64>::ones((n, k));
    design.slice_mut(ndarray::s![.., 1..]).assign(z);

    let mut beta = Array1::<f64>::zeros(k);
    let mut prev_dev = f64::INFINITY;
    for iter in 0..max_iter {
        let eta = design.dot(&beta);
        let p: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let dev: f64 =
            deviance(y, &p) + lambda * beta.slice(ndarray::s![1..]).mapv(|b| b * b).sum();
        if !dev.is_finite() {
            return Err(Error::NonConvergence {
                iterations: iter,
                deviance: dev,
                rel_change: f64::NAN,
            });
        }
        let rel = (prev_dev - dev).abs() / (dev.abs() + 1e-10);
        if rel < tol {
            return Ok(beta.to_vec());
        }
        prev_dev = dev;

        // weighted normal equations (X^T W X + lambda R) beta = X^T W zvec
        let mut xtwx = Array2::<f64>::zeros((k, k));
        let mut xtwz = Array1::<f64>::zeros(k);
        for i in 0..n {
            let w = (p[i] * (1.0 - p[i])).max(1e-10);
            let zi = eta[i] + (y[i] - p[i]) / w;
            for a in 0..k {
                let xa = design[[i, a]];
                xtwz[a] += w * xa * zi;
                for b in a..k {
                    xtwx[[a, b]] += w * xa * design[[i, b]];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                xtwx[[a, b]] = xtwx[[b, a]];
            }
        }
        for a in 1..k {
            xtwx[[a, a]] += lambda;
        }
        let rhs = Array2::from_shape_fn((k, 1), |(i, _)| xtwz[i]);
        let sol = solve_spd(&xtwx, &rhs)?;
        for a in 0..k {
            beta[a] = sol[[a, 0]];
        }
    }
    let eta = design.dot(&beta);
    let p: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
    let dev = deviance(y, &p);
    Err(Error::NonConvergence {
        iterations: max_iter,
        deviance: dev,
        rel_change: (prev_dev - dev).abs() / (dev.abs() + 1e-10),
    })
}

pub fn fit(
    params: &FglmParams,
    x: ArrayView2<f64>,
    labels: &[ClassId],
    n_classes: usize,
) -> Result<FglmFitted> {
    if labels.len() != x.nrows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            x.nrows()
        )));
    }
    if !(params.lambda > 0.0) {
        return Err(Error::InvalidParam(format!(
            "fglm lambda must be positive, got {}",
            params.lambda
        )));
    }
    // The input block is treated as one functional covariate on grid 1..M.
    let grid: Vec<f64> = (1..=x.ncols()).map(|t| t as f64).collect();
    let basis = bsignal::fit(
        &BsignalParams {
            knots: params.knots,
            df: params.df,
        },
        x,
        &grid,
    )?;
    let z = basis.transform(x)?.values;

    let problems: Vec<usize> = if n_classes == 2 {
        vec![1]
    } else {
        (0..n_classes).collect()
    };
    let mut coefficients = Vec::with_capacity(problems.len());
    for &c in &problems {
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l == c { 1.0 } else { 0.0 })
            .collect();
        coefficients.push(irls(&z, &y, params.lambda, params.max_iter, params.tol)?);
    }
    Ok(FglmFitted {
        params: params.clone(),
        basis,
        coefficients,
        n_classes,
        input_len: x.ncols(),
    })
}

impl FglmFitted {
    /// Per-problem probabilities; one column for binary targets, one per
    /// class under one-vs-all.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_len {
            return Err(Error::Shape(format!(
                "fglm fitted on width {}, got {}",
                self.input_len,
                x.ncols()
            )));
        }
        let z = self.basis.transform(x)?.values;
        let mut out = Array2::<f64>::zeros((x.nrows(), self.coefficients.len()));
        for (pidx, beta) in self.coefficients.iter().enumerate() {
            for i in 0..z.nrows() {
                let mut eta = beta[0];
                for j in 0..z.ncols() {
                    eta += beta[j + 1] * z[[i, j]];
                }
                out[[i, pidx]] = sigmoid(eta);
            }
        }
        Ok(out)
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ClassId>> {
        let proba = self.predict_proba(x)?;
        let mut out = Vec::with_capacity(proba.nrows());
        for i in 0..proba.nrows() {
            if self.n_classes == 2 {
                out.push(if proba[[i, 0]] >= 0.5 { 1 } else { 0 });
            } else {
                let mut best = 0;
                for c in 1..self.n_classes {
                    if proba[[i, c]] > proba[[i, best]] {
                        best = c;
                    }
                }
                out.push(best);
            }
        }
        Ok(out)
    }

    /// Intercept-first coefficient vectors, one per fitted problem.
    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }
}
