//! Small dense linear algebra helpers on row-major `Vec<Vec<f64>>` data.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};

pub(crate) fn to_mat(rows: &[Vec<f64>], ncols: usize) -> Mat<f64> {
    Mat::from_fn(rows.len(), ncols, |i, j| {
        rows[i].get(j).copied().unwrap_or(0.0)
    })
}

/// Singular values (descending) and the full set of right singular vectors.
pub(crate) struct RightSvd {
    pub s: Vec<f64>,
    /// `v[i]` pairs with `s[i]`; indices past `s.len()` span the rest of the domain.
    pub v: Vec<Vec<f64>>,
}

pub(crate) fn right_svd(rows: &[Vec<f64>], ncols: usize) -> Result<RightSvd> {
    let a = to_mat(rows, ncols);
    let svd = a
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector().iter().copied().collect();
    let vm = svd.V();
    let v = (0..ncols)
        .map(|c| (0..ncols).map(|r| vm[(r, c)]).collect())
        .collect();
    Ok(RightSvd { s, v })
}

/// Orthonormal basis of `{x : A x = 0}` using a relative singular-value cutoff.
pub(crate) fn null_space(rows: &[Vec<f64>], ncols: usize, tol: f64) -> Result<Vec<Vec<f64>>> {
    let RightSvd { s, v } = right_svd(rows, ncols)?;
    Ok(v.into_iter()
        .enumerate()
        .filter(|(i, _)| s.get(*i).map_or(true, |&x| x < tol))
        .map(|(_, x)| x)
        .collect())
}

/// Orthonormal basis of the span of `cols` (each of length `n`), keeping
/// directions whose singular value exceeds `tol`.
pub(crate) fn range_basis(cols: &[Vec<f64>], n: usize, tol: f64) -> Result<Vec<Vec<f64>>> {
    let a = Mat::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let u = svd.U();
    Ok((0..cols.len().min(n))
        .filter(|&k| s[k] > tol)
        .map(|k| (0..n).map(|i| u[(i, k)]).collect())
        .collect())
}

/// Singular values in descending order.
pub fn singular_values(rows: &[Vec<f64>], ncols: usize) -> Result<Vec<f64>> {
    to_mat(rows, ncols)
        .singular_values()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))
}

/// Minimum-norm least-squares solution with a relative cutoff `rcond`.
pub(crate) fn lstsq(rows: &[Vec<f64>], rhs: &[f64], rcond: f64) -> Result<Vec<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let a = to_mat(rows, ncols);
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let smax = if s.nrows() > 0 { s[0] } else { 0.0 };
    let mut x = vec![0.0; ncols];
    for k in 0..s.nrows() {
        if s[k] <= rcond * smax {
            continue;
        }
        let coef: f64 = (0..rows.len()).map(|i| u[(i, k)] * rhs[i]).sum::<f64>() / s[k];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += coef * v[(j, k)];
        }
    }
    Ok(x)
}

/// Solves a square system by LU with partial pivoting.
pub(crate) fn solve(rows: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    let a = to_mat(rows, n);
    let b = Mat::from_fn(n, 1, |i, _| rhs[i]);
    let x = a.partial_piv_lu().solve(&b);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Numerical("singular linear system".into()))
    }
}
