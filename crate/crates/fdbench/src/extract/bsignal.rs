//! B-spline basis features.
//!
//! A cubic basis B_1..B_K with `knots` interior knots (open uniform knot
//! vector) is evaluated on the grid; the feature vector of a curve x is the
//! grid-weighted inner product (1/L) * B^T x. The `df` parameter selects a
//! smoothing penalty level: lambda is chosen by bisection so that the trace
//! of the penalized smoother hat matrix matches `df`. The penalty is on
//! second-order coefficient differences, so constants and linear trends are
//! reproduced exactly by `reconstruct` regardless of df.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::FeatureBlock;
use crate::linalg::solve_spd;

/// Evaluate a B-spline basis of the given degree with `interior_knots`
/// uniformly spaced interior knots on an open (clamped) knot vector over
/// the grid's range. Returns the L x (interior_knots + degree + 1) design
/// matrix; rows sum to one on the whole range.
pub fn bspline_design_matrix(
    grid: &[f64],
    interior_knots: usize,
    degree: usize,
) -> Result<Array2<f64>> {
    if grid.len() < 2 {
        return Err(Error::Shape("bspline: grid needs at least 2 points".into()));
    }
    if degree == 0 {
        return Err(Error::InvalidParam("bspline degree must be >= 1".into()));
    }
    let a = grid[0];
    let b = grid[grid.len() - 1];
    let n_basis = interior_knots + degree + 1;
    let mut knots = Vec::with_capacity(n_basis + degree + 1);
    knots.extend(std::iter::repeat(a).take(degree + 1));
    for i in 1..=interior_knots {
        knots.push(a + (b - a) * i as f64 / (interior_knots + 1) as f64);
    }
    knots.extend(std::iter::repeat(b).take(degree + 1));

    let mut design = Array2::<f64>::zeros((grid.len(), n_basis));
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    let mut vals = vec![0.0; degree + 1];
    for (row, &x) in grid.iter().enumerate() {
        // Find the knot span; the right endpoint closes into the last span.
        let span = if x >= b {
            n_basis - 1
        } else {
            let mut s = degree;
            while s + 1 < n_basis && knots[s + 1] <= x {
                s += 1;
            }
            s
        };
        // Triangular scheme for the degree+1 non-zero basis values.
        vals[0] = 1.0;
        for j in 1..=degree {
            left[j] = x - knots[span + 1 - j];
            right[j] = knots[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = if denom != 0.0 { vals[r] / denom } else { 0.0 };
                vals[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            vals[j] = saved;
        }
        for (offset, &v) in vals.iter().enumerate() {
            design[[row, span - degree + offset]] = v;
        }
    }
    Ok(design)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BsignalParams {
    pub knots: usize,
    pub df: f64,
}

impl Default for BsignalParams {
    fn default() -> Self {
        Self { knots: 10, df: 3.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BsignalFitted {
    params: BsignalParams,
    design: Array2<f64>,
    lambda: f64,
    effective_df: f64,
    input_len: usize,
}

/// Second-difference penalty D^T D for K coefficients.
fn difference_penalty(k: usize) -> Array2<f64> {
    let mut omega = Array2::<f64>::zeros((k, k));
    for r in 0..k.saturating_sub(2) {
        let idx = [r, r + 1, r + 2];
        let w = [1.0, -2.0, 1.0];
        for (i, &ii) in idx.iter().enumerate() {
            for (j, &jj) in idx.iter().enumerate() {
                omega[[ii, jj]] += w[i] * w[j];
            }
        }
    }
    omega
}

fn hat_trace(gram: &Array2<f64>, omega: &Array2<f64>, lambda: f64) -> Result<f64> {
    let mut m = gram.clone();
    m.scaled_add(lambda, omega);
    let x = solve_spd(&m, gram)?;
    Ok((0..x.nrows()).map(|i| x[[i, i]]).sum())
}

pub fn fit(params: &BsignalParams, train: ArrayView2<f64>, grid: &[f64]) -> Result<BsignalFitted> {
    let l = train.ncols();
    if grid.len() != l {
        return Err(Error::Shape(format!(
            "bsignal: grid length {} != curve length {l}",
            grid.len()
        )));
    }
    if params.knots < 3 {
        return Err(Error::InvalidParam(format!(
            "bsignal.knots must be >= 3, got {}",
            params.knots
        )));
    }
    if params.knots > l - 1 {
        return Err(Error::InvalidParam(format!(
            "bsignal.knots = {} exceeds L-1 = {}",
            params.knots,
            l - 1
        )));
    }
    if params.df < 1.0 {
        return Err(Error::InvalidParam(format!(
            "bsignal.df must be >= 1, got {}",
            params.df
        )));
    }
    let design = bspline_design_matrix(grid, params.knots, 3)?;
    let gram = design.t().dot(&design);
    let omega = difference_penalty(design.ncols());

    // Bisect log-lambda so trace(hat) ~ df; the trace is decreasing in
    // lambda, bounded below by 2 (second differences leave constants and
    // linears unpenalized), so out-of-range df values clamp.
    let (mut lo, mut hi) = (1e-10f64, 1e12f64);
    let t_lo = hat_trace(&gram, &omega, lo)?;
    let t_hi = hat_trace(&gram, &omega, hi)?;
    let lambda = if params.df >= t_lo {
        lo
    } else if params.df <= t_hi {
        hi
    } else {
        let mut lam = (lo.ln() * 0.5 + hi.ln() * 0.5).exp();
        for _ in 0..80 {
            lam = (lo.ln() * 0.5 + hi.ln() * 0.5).exp();
            let t = hat_trace(&gram, &omega, lam)?;
            if (t - params.df).abs() < 1e-4 {
                break;
            }
            if t > params.df {
                lo = lam;
            } else {
                hi = lam;
            }
        }
        lam
    };
    let effective_df = hat_trace(&gram, &omega, lambda)?;
    Ok(BsignalFitted {
        params: params.clone(),
        design,
        lambda,
        effective_df,
        input_len: l,
    })
}

impl BsignalFitted {
    pub fn output_width(&self) -> usize {
        self.design.ncols()
    }

    /// Trace of the smoother hat matrix actually achieved.
    pub fn effective_df(&self) -> f64 {
        self.effective_df
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn design(&self) -> &Array2<f64> {
        &self.design
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<FeatureBlock> {
        if x.ncols() != self.input_len {
            return Err(Error::Shape(format!(
                "bsignal fitted on length {}, got {}",
                self.input_len,
                x.ncols()
            )));
        }
        let values = x.dot(&self.design) / self.input_len as f64;
        let names = (1..=self.design.ncols())
            .map(|m| format!("bsig{m}"))
            .collect();
        Ok(FeatureBlock::new(names, values))
    }

    /// Penalized back-projection from features to a curve on the grid:
    /// coefficients solve (B^T B + lambda*Omega) c = L * z.
    pub fn reconstruct(&self, features: &[f64]) -> Result<Vec<f64>> {
        let k = self.design.ncols();
        if features.len() != k {
            return Err(Error::Shape(format!(
                "bsignal reconstruct: {} features, basis has {k}",
                features.len()
            )));
        }
        let gram = self.design.t().dot(&self.design);
        let omega = difference_penalty(k);
        let mut m = gram;
        m.scaled_add(self.lambda, &omega);
        let rhs = Array2::from_shape_fn((k, 1), |(i, _)| features[i] * self.input_len as f64);
        let coef = solve_spd(&m, &rhs)?;
        let curve = self.design.dot(&coef);
        Ok(curve.column(0).to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Naive recursive Cox-de Boor evaluation, independent of the
    /// triangular-scheme implementation above.
    fn naive_basis(i: usize, k: usize, x: f64, t: &[f64], right_end: f64) -> f64 {
        if k == 0 {
            let in_span = t[i] <= x && x < t[i + 1];
            let closes_end = x == right_end && t[i] < t[i + 1] && t[i + 1] == right_end;
            return if in_span || closes_end { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        if t[i + k] > t[i] {
            v += (x - t[i]) / (t[i + k] - t[i]) * naive_basis(i, k - 1, x, t, right_end);
        }
        if t[i + k + 1] > t[i + 1] {
            v += (t[i + k + 1] - x) / (t[i + k + 1] - t[i + 1])
                * naive_basis(i + 1, k - 1, x, t, right_end);
        }
        v
    }

    fn naive_design(grid: &[f64], interior: usize, degree: usize) -> Array2<f64> {
        let a = grid[0];
        let b = grid[grid.len() - 1];
        let n_basis = interior + degree + 1;
        let mut t = Vec::new();
        t.extend(std::iter::repeat(a).take(degree + 1));
        for i in 1..=interior {
            t.push(a + (b - a) * i as f64 / (interior + 1) as f64);
        }
        t.extend(std::iter::repeat(b).take(degree + 1));
        Array2::from_shape_fn((grid.len(), n_basis), |(r, m)| {
            naive_basis(m, degree, grid[r], &t, b)
        })
    }

    fn unit_grid(l: usize) -> Vec<f64> {
        (1..=l).map(|t| t as f64).collect()
    }

    #[test]
    fn partition_of_unity() {
        for knots in [3usize, 10, 50] {
            for l in [32usize, 128] {
                let grid = unit_grid(l);
                let design = bspline_design_matrix(&grid, knots, 3).unwrap();
                for (r, row) in design.rows().into_iter().enumerate() {
                    let s: f64 = row.sum();
                    assert!((s - 1.0).abs() < 1e-9, "knots={knots} L={l} row={r}: {s}");
                }
            }
        }
    }

    #[test]
    fn matches_naive_cox_de_boor() {
        let grid = unit_grid(64);
        let design = bspline_design_matrix(&grid, 10, 3).unwrap();
        let oracle = naive_design(&grid, 10, 3);
        for i in 0..design.nrows() {
            for j in 0..design.ncols() {
                assert!(
                    (design[[i, j]] - oracle[[i, j]]).abs() < 1e-12,
                    "({i},{j}): {} vs {}",
                    design[[i, j]],
                    oracle[[i, j]]
                );
            }
        }
    }

    #[test]
    fn features_match_dense_inner_product_oracle() {
        let l = 64;
        let grid = unit_grid(l);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = Array2::from_shape_fn((5, l), |_| rng.random_range(-2.0..2.0));
        let fitted = fit(&BsignalParams::default(), x.view(), &grid).unwrap();
        let block = fitted.transform(x.view()).unwrap();

        let oracle_design = naive_design(&grid, 10, 3);
        for i in 0..x.nrows() {
            for m in 0..oracle_design.ncols() {
                let mut acc = 0.0;
                for t in 0..l {
                    acc += x[[i, t]] * oracle_design[[t, m]];
                }
                acc /= l as f64;
                assert!(
                    (block.values[[i, m]] - acc).abs() < 1e-9,
                    "row {i} basis {m}"
                );
            }
        }
    }

    #[test]
    fn constant_curve_features_and_reconstruction() {
        let l = 32;
        let grid = unit_grid(l);
        let c = 2.75;
        let x = Array2::from_elem((1, l), c);
        let fitted = fit(&BsignalParams { knots: 10, df: 3.0 }, x.view(), &grid).unwrap();
        let block = fitted.transform(x.view()).unwrap();
        // inner products equal c times the basis column means
        for m in 0..fitted.output_width() {
            let mean: f64 = fitted.design().column(m).sum() / l as f64;
            assert!((block.values[[0, m]] - c * mean).abs() < 1e-12);
        }
        let rec = fitted.reconstruct(&block.values.row(0).to_vec()).unwrap();
        for v in rec {
            assert!((v - c).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn effective_df_tracks_requested_df() {
        let l = 64;
        let grid = unit_grid(l);
        let x = Array2::from_shape_fn((3, l), |(i, t)| ((i + 1) as f64 * t as f64 * 0.1).sin());
        for df in [3.0, 6.0, 10.0] {
            let fitted = fit(&BsignalParams { knots: 10, df }, x.view(), &grid).unwrap();
            assert!(
                (fitted.effective_df() - df).abs() < 1e-2,
                "df={df}: got {}",
                fitted.effective_df()
            );
        }
    }

    #[test]
    fn too_many_knots_rejected() {
        let grid = unit_grid(16);
        let x = Array2::<f64>::zeros((2, 16));
        let err = fit(&BsignalParams { knots: 16, df: 3.0 }, x.view(), &grid).unwrap_err();
        assert!(err.to_string().contains("L-1"));
    }
}
