//! Small dense linear algebra: SPD solves and a symmetric eigensolver.
//! Sized for design matrices and covariance blocks, not for large systems.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Solve `a x = b` for SPD `a` via Cholesky, falling back to pivoted LU when
/// the factorization hits a non-positive pivot.
pub(crate) fn solve_spd(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    match cholesky_solve(a, b) {
        Ok(x) => Ok(x),
        Err(_) => lu_solve(a, b),
    }
}

fn cholesky_solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Shape(format!(
            "cholesky: a is {}x{}, b has {} rows",
            n,
            a.ncols(),
            b.nrows()
        )));
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Shape("matrix not positive definite".into()));
                }
                l[[i, j]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    // forward then back substitution per column
    let m = b.ncols();
    let mut x = b.clone();
    for c in 0..m {
        for i in 0..n {
            let mut s = x[[i, c]];
            for k in 0..i {
                s -= l[[i, k]] * x[[k, c]];
            }
            x[[i, c]] = s / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut s = x[[i, c]];
            for k in (i + 1)..n {
                s -= l[[k, i]] * x[[k, c]];
            }
            x[[i, c]] = s / l[[i, i]];
        }
    }
    Ok(x)
}

/// Solve `a x = b` by LU with partial pivoting.
pub(crate) fn lu_solve(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Shape(format!(
            "lu: a is {}x{}, b has {} rows",
            n,
            a.ncols(),
            b.nrows()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.ncols();
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if lu[[r, col]].abs() > lu[[pivot, col]].abs() {
                pivot = r;
            }
        }
        if lu[[pivot, col]].abs() < 1e-300 {
            return Err(Error::Shape("singular matrix in lu_solve".into()));
        }
        if pivot != col {
            for j in 0..n {
                lu.swap([col, j], [pivot, j]);
            }
            for j in 0..m {
                x.swap([col, j], [pivot, j]);
            }
        }
        for r in (col + 1)..n {
            let f = lu[[r, col]] / lu[[col, col]];
            lu[[r, col]] = f;
            for j in (col + 1)..n {
                lu[[r, j]] -= f * lu[[col, j]];
            }
            for j in 0..m {
                let delta = f * x[[col, j]];
                x[[r, j]] -= delta;
            }
        }
    }
    for c in 0..m {
        for i in (0..n).rev() {
            let mut s = x[[i, c]];
            for k in (i + 1)..n {
                s -= lu[[i, k]] * x[[k, c]];
            }
            x[[i, c]] = s / lu[[i, i]];
        }
    }
    Ok(x)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in decreasing order with matching eigenvector columns.
pub(crate) fn symmetric_eigen(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!(
            "symmetric_eigen: matrix is {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                m[[p, p]] = app - t * apq;
                m[[q, q]] = aqq + t * apq;
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m[[i, p]];
                        let aiq = m[[i, q]];
                        m[[i, p]] = c * aip - s * aiq;
                        m[[p, i]] = m[[i, p]];
                        m[[i, q]] = s * aip + c * aiq;
                        m[[q, i]] = m[[i, q]];
                    }
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[[i, i]]).collect();
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[[i, new]] = v[[i, old]];
        }
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn spd_solve_recovers_identity() {
        let a = array![[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let b = Array2::<f64>::eye(3);
        let x = solve_spd(&a, &b).unwrap();
        let prod = a.dot(&x);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn lu_handles_indefinite() {
        let a = array![[0.0, 1.0], [1.0, 0.0]];
        let b = array![[1.0], [2.0]];
        let x = lu_solve(&a, &b).unwrap();
        assert!((x[[0, 0]] - 2.0).abs() < 1e-12);
        assert!((x[[1, 0]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let a = array![[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(&a).unwrap();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        // A v = lambda v for each pair
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[[i, j]] * vecs[[j, k]]).sum();
                assert!((av - vals[k] * vecs[[i, k]]).abs() < 1e-10, "pair {k}");
            }
        }
    }
}
