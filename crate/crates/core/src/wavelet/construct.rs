//! Construction of orthonormal boundary scaling functions and boundary
//! wavelets on the half line `[0, inf)` that preserve polynomials of degree
//! below `nu`.
//!
//! This runs once to produce the shipped filter files; at run time the files
//! are loaded instead.

use twofloat::TwoFloat;

use super::filters::{BoundaryFilterSet, EdgeFilters, Matrix};
use super::{highpass, Family, WaveletSpec};
use crate::error::{Error, Result};
use crate::linalg;

type D = TwoFloat;

fn dd(x: f64) -> D {
    D::from(x)
}

/// Quotient with one residual correction step.
fn div(a: D, b: D) -> D {
    let q = a / b;
    let r = a - q * b;
    q + r / b
}

/// Taps refined to double-double precision by Newton's method on the
/// orthonormality equations `sum_k h_k h_{k+2s} = delta_s` and the vanishing
/// moments `sum_k (-1)^k k^p h_k = 0`, `p < nu`, starting from `h`.
pub fn refine_taps(h: &[f64]) -> Result<Vec<D>> {
    let len = h.len();
    let nu = len / 2;
    let k_of = |i: usize| i as f64 - nu as f64 + 1.0;
    let mut x: Vec<D> = h.iter().map(|&v| dd(v)).collect();
    let residual = |x: &[D]| -> Vec<D> {
        let mut f = Vec::with_capacity(len);
        for s in 0..nu {
            let mut v = dd(if s == 0 { -1.0 } else { 0.0 });
            for i in 0..len - 2 * s {
                v += x[i] * x[i + 2 * s];
            }
            f.push(v);
        }
        for p in 0..nu as i32 {
            let mut v = dd(0.0);
            for (i, xi) in x.iter().enumerate() {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                v += *xi * dd(sign * k_of(i).powi(p));
            }
            f.push(v);
        }
        f
    };
    for _ in 0..8 {
        let f = residual(&x);
        let norm = f.iter().map(|v| f64::from(*v).abs()).fold(0.0, f64::max);
        if norm < 1e-30 {
            break;
        }
        let mut jac = vec![vec![dd(0.0); len]; len];
        for s in 0..nu {
            for i in 0..len - 2 * s {
                jac[s][i] += x[i + 2 * s];
                jac[s][i + 2 * s] += x[i];
            }
        }
        for p in 0..nu {
            for i in 0..len {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                jac[nu + p][i] = dd(sign * k_of(i).powi(p as i32));
            }
        }
        let step = dd_solve(jac, f)?;
        for (xi, si) in x.iter_mut().zip(step) {
            *xi -= si;
        }
    }
    let f = residual(&x);
    let norm = f.iter().map(|v| f64::from(*v).abs()).fold(0.0, f64::max);
    let moved = x
        .iter()
        .zip(h)
        .map(|(a, &b)| (f64::from(*a) - b).abs())
        .fold(0.0, f64::max);
    if norm > 1e-28 || moved > 1e-9 {
        return Err(Error::Numerical(format!(
            "tap refinement failed (residual {norm:e}, moved {moved:e})"
        )));
    }
    Ok(x)
}

/// Refined taps rounded to `f64`.
pub fn refined_taps_f64(h: &[f64]) -> Result<Vec<f64>> {
    Ok(refine_taps(h)?.into_iter().map(f64::from).collect())
}

fn dd_taps(h: &[f64]) -> impl Fn(i64) -> D {
    let nu = (h.len() / 2) as i64;
    let refined = refine_taps(h).expect("shipped taps refine");
    move |k: i64| {
        let i = k + nu - 1;
        if i < 0 || i >= refined.len() as i64 {
            dd(0.0)
        } else {
            refined[i as usize]
        }
    }
}

/// Gaussian elimination with partial pivoting.
fn dd_solve(mut a: Vec<Vec<D>>, mut b: Vec<D>) -> Result<Vec<D>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("finite")
            })
            .expect("non-empty");
        if a[piv][col].abs() < dd(1e-28) {
            return Err(Error::Numerical(
                "singular system in boundary construction".into(),
            ));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = div(a[r][col], a[col][col]);
            if f == dd(0.0) {
                continue;
            }
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![dd(0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = div(s, a[r][r]);
    }
    Ok(x)
}

/// Least squares by Householder QR.
fn dd_lstsq(rows: &[Vec<D>], rhs: &[D]) -> Result<Vec<D>> {
    let (m, n) = (rows.len(), rows[0].len());
    let mut a: Vec<Vec<D>> = rows.to_vec();
    let mut b: Vec<D> = rhs.to_vec();
    for col in 0..n {
        let norm = (col..m)
            .fold(dd(0.0), |s, r| s + a[r][col] * a[r][col])
            .sqrt();
        if norm < dd(1e-28) {
            return Err(Error::Numerical(
                "rank-deficient system in boundary construction".into(),
            ));
        }
        let alpha = if a[col][col] > dd(0.0) { -norm } else { norm };
        let mut v: Vec<D> = (col..m).map(|r| a[r][col]).collect();
        v[0] -= alpha;
        let vnorm2 = v.iter().fold(dd(0.0), |s, x| s + *x * *x);
        for c in col..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(dd(0.0), |s, (k, x)| s + *x * a[col + k][c]);
            let f = div(dd(2.0) * dot, vnorm2);
            for (k, x) in v.iter().enumerate() {
                a[col + k][c] -= f * *x;
            }
        }
        let dot = v
            .iter()
            .enumerate()
            .fold(dd(0.0), |s, (k, x)| s + *x * b[col + k]);
        let f = div(dd(2.0) * dot, vnorm2);
        for (k, x) in v.iter().enumerate() {
            b[col + k] -= f * *x;
        }
    }
    let mut x = vec![dd(0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = div(s, a[r][r]);
    }
    Ok(x)
}

fn antiderivative_dd(h: &[f64]) -> Result<Vec<D>> {
    let nu = (h.len() / 2) as i64;
    let lo = -nu + 1;
    let hk = dd_taps(h);
    let sqrt2 = dd(2.0).sqrt();
    let unknowns: Vec<i64> = (lo + 1..nu).collect();
    let dim = unknowns.len();
    let mut out = vec![dd(0.0); (2 * nu) as usize];
    out[(2 * nu - 1) as usize] = dd(1.0);
    if dim == 0 {
        return Ok(out);
    }
    let mut a = vec![vec![dd(0.0); dim]; dim];
    let mut b = vec![dd(0.0); dim];
    for (row, &n) in unknowns.iter().enumerate() {
        a[row][row] += dd(1.0);
        for k in -nu + 1..=nu {
            let c = div(hk(k), sqrt2);
            let t = 2 * n - k;
            if t >= nu {
                b[row] += c;
            } else if t > lo {
                a[row][(t - lo - 1) as usize] -= c;
            }
        }
    }
    let x = dd_solve(a, b)?;
    for (i, &n) in unknowns.iter().enumerate() {
        out[(n - lo) as usize] = x[i];
    }
    Ok(out)
}

/// Values of the antiderivative `Phi(x) = int_{-inf}^x phi` at the integers
/// `n = -nu + 1 ..= nu`.
pub fn antiderivative_at_integers(h: &[f64]) -> Result<Vec<f64>> {
    Ok(antiderivative_dd(h)?.into_iter().map(f64::from).collect())
}

/// Inner products `J(a, b) = int_0^inf phi(x - a) phi(x - b) dx`.
#[derive(Debug, Clone)]
pub struct HalfLineGram {
    nu: i64,
    table: Vec<D>,
}

impl HalfLineGram {
    pub fn new(h: &[f64]) -> Result<Self> {
        let nu = (h.len() / 2) as i64;
        let lo = -nu + 1;
        let width = (2 * nu - 2).max(0) as usize;
        let gram = HalfLineGram {
            nu,
            table: vec![dd(0.0); width * width],
        };
        if width == 0 {
            return Ok(gram);
        }
        let hk = dd_taps(h);
        let idx = |a: i64, b: i64| ((a - lo) as usize) * width + (b - lo) as usize;
        let big_phi = antiderivative_dd(h)?;
        let mut rows: Vec<Vec<D>> = Vec::new();
        let mut rhs: Vec<D> = Vec::new();
        for a in lo..nu - 1 {
            for b in lo..nu - 1 {
                let mut row = vec![dd(0.0); width * width];
                row[idx(a, b)] += dd(1.0);
                let mut r = dd(0.0);
                for k in -nu + 1..=nu {
                    for k2 in -nu + 1..=nu {
                        let c = hk(k) * hk(k2);
                        let (aa, bb) = (2 * a + k, 2 * b + k2);
                        match gram.known(aa, bb) {
                            Some(v) => r += c * v,
                            None => row[idx(aa, bb)] -= c,
                        }
                    }
                }
                rows.push(row);
                rhs.push(r);
            }
        }
        // Partition of unity: sum_a J(a, b) = int_0^inf phi(x - b) dx = 1 - Phi(-b).
        for b in lo..nu - 1 {
            let mut row = vec![dd(0.0); width * width];
            let mut r = dd(1.0) - big_phi[(-b - lo) as usize];
            for a in b - 2 * nu..=b + 2 * nu {
                match gram.known(a, b) {
                    Some(v) => r -= v,
                    None => row[idx(a, b)] += dd(1.0),
                }
            }
            rows.push(row);
            rhs.push(r);
        }
        let sol = dd_lstsq(&rows, &rhs)?;
        let mut resid = 0.0f64;
        for (row, &r) in rows.iter().zip(&rhs) {
            let mut s = -r;
            for (x, y) in row.iter().zip(&sol) {
                s += *x * *y;
            }
            resid = resid.max(f64::from(s).abs());
        }
        if resid > 1e-26 {
            return Err(Error::Numerical(format!(
                "half-line Gram system inconsistent (residual {resid:e})"
            )));
        }
        Ok(HalfLineGram { nu, table: sol })
    }

    fn known(&self, a: i64, b: i64) -> Option<D> {
        let nu = self.nu;
        if a >= nu - 1 || b >= nu - 1 {
            Some(dd(if a == b { 1.0 } else { 0.0 }))
        } else if a <= -nu || b <= -nu || (a - b).abs() >= 2 * nu - 1 {
            Some(dd(0.0))
        } else {
            None
        }
    }

    fn get_dd(&self, a: i64, b: i64) -> D {
        match self.known(a, b) {
            Some(v) => v,
            None => {
                let lo = -self.nu + 1;
                let width = (2 * self.nu - 2) as usize;
                self.table[((a - lo) as usize) * width + (b - lo) as usize]
            }
        }
    }

    pub fn get(&self, a: i64, b: i64) -> f64 {
        f64::from(self.get_dd(a, b))
    }
}

/// Orthonormal left-edge functions `phi^left_m = sum_t c[m, t] phi(. - t)|[0,inf)`,
/// `t = -nu + 1 ..= nu - 1`, with supports `[0, nu + m]`.
fn edge_coefficients(nu: i64, gram: &HalfLineGram) -> Result<Vec<Vec<D>>> {
    let lo = -nu + 1;
    let cols = (2 * nu - 1) as usize;
    let n = nu as usize;
    let c: Vec<Vec<D>> = (0..n)
        .map(|k| {
            (0..cols)
                .map(|i| {
                    let t = lo + i as i64;
                    dd((k as i64 + 1..nu).map(|r| (t - r) as f64).product::<f64>())
                })
                .collect()
        })
        .collect();
    let g = |a: usize, b: usize| gram.get_dd(lo + a as i64, lo + b as i64);
    let gc: Vec<Vec<D>> = (0..n)
        .map(|k| {
            (0..cols)
                .map(|b| (0..cols).fold(dd(0.0), |s, a| s + c[k][a] * g(a, b)))
                .collect()
        })
        .collect();
    let s: Vec<Vec<D>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..cols).fold(dd(0.0), |acc, b| acc + gc[i][b] * c[j][b]))
                .collect()
        })
        .collect();
    // Cholesky S = L L^T, then Cn = L^{-1} C.
    let mut l = vec![vec![dd(0.0); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut v = s[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            if i == j {
                if v <= dd(0.0) {
                    return Err(Error::Numerical(
                        "edge Gram matrix is not positive definite".into(),
                    ));
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = div(v, l[j][j]);
            }
        }
    }
    let mut cn = vec![vec![dd(0.0); cols]; n];
    for i in 0..n {
        for col in 0..cols {
            let mut v = c[i][col];
            for k in 0..i {
                v -= l[i][k] * cn[k][col];
            }
            cn[i][col] = div(v, l[i][i]);
        }
    }
    Ok(cn)
}

/// Two-scale rows of the edge functions in fine coordinates: index `i < nu`
/// is `sqrt(2) phi^left_i(2x)`, index `i >= nu` is `sqrt(2) phi(2x - i)`.
fn edge_refinement(h: &[f64], cn: &[Vec<D>], gram: &HalfLineGram) -> Result<Vec<Vec<f64>>> {
    let nu = (h.len() / 2) as i64;
    let hk = dd_taps(h);
    let lo = -nu + 1;
    let n = nu as usize;
    let ulo = 3 * lo;
    let uhi = 2 * (nu - 1) + nu;
    let width = (uhi + 1) as usize;
    let mut rows = vec![vec![0.0; width]; n];
    for m in 0..n {
        let d: Vec<D> = (ulo..=uhi)
            .map(|u| {
                (0..cn[m].len()).fold(dd(0.0), |s, i| s + cn[m][i] * hk(u - 2 * (lo + i as i64)))
            })
            .collect();
        let du = |u: i64| d[(u - ulo) as usize];
        let mut norm2 = dd(0.0);
        for k in 0..n {
            let mut a = dd(0.0);
            for u in ulo..=uhi {
                for (i, t) in (lo..nu).enumerate() {
                    a += du(u) * cn[k][i] * gram.get_dd(u, t);
                }
            }
            norm2 += a * a;
            rows[m][k] = f64::from(a);
        }
        for t in nu..=uhi {
            norm2 += du(t) * du(t);
            rows[m][t as usize] = f64::from(du(t));
        }
        let defect = f64::from(norm2 - dd(1.0));
        if defect.abs() > 1e-13 {
            return Err(Error::Numerical(format!(
                "edge function {m} is not refinable in the edge space (norm defect {defect:e})"
            )));
        }
    }
    Ok(rows)
}

fn to_matrix(rows: &[Vec<f64>]) -> Matrix {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    Matrix::from_fn(rows.len(), width, |i, j| {
        rows[i].get(j).copied().unwrap_or(0.0)
    })
}

fn sign_normalize(v: &mut [f64]) {
    if let Some(i) = v.iter().rposition(|x| x.abs() > 1e-12) {
        if v[i] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    for x in v.iter_mut() {
        if x.abs() < 1e-15 {
            *x = 0.0;
        }
    }
}

/// Orthonormal basis of the complement of `V_0` and of the interior wavelets
/// inside the half-line `V_1`, with nested (staggered) supports.
fn edge_wavelets(h: &[f64], phi_rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let nu = (h.len() / 2) as i64;
    let n = nu as usize;
    let g = highpass(h);
    let max_window = (8 * nu) as usize;
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    for window in n + 1..=max_window {
        let mut rows: Vec<Vec<f64>> = phi_rows
            .iter()
            .map(|r| {
                (0..window)
                    .map(|i| r.get(i).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        let mut shift = nu;
        while 2 * shift - nu + 1 < window as i64 {
            for filt in [h, g.as_slice()] {
                let mut row = vec![0.0; window];
                for k in -nu + 1..=nu {
                    let i = 2 * shift + k;
                    if i < window as i64 {
                        row[i as usize] = filt[(k + nu - 1) as usize];
                    }
                }
                rows.push(row);
            }
            shift += 1;
        }
        let null = linalg::null_space(&rows, window, 1e-9)?;
        if null.len() > chosen.len() {
            let projected: Vec<Vec<f64>> = null
                .iter()
                .map(|v| {
                    let mut p = v.clone();
                    for c in &chosen {
                        let ip: f64 = c.iter().zip(&p).map(|(a, b)| a * b).sum();
                        for (x, y) in p.iter_mut().zip(c) {
                            *x -= ip * y;
                        }
                    }
                    p
                })
                .collect();
            for mut v in linalg::range_basis(&projected, window, 0.5)? {
                sign_normalize(&mut v);
                chosen.push(v);
            }
        }
        if chosen.len() >= n {
            break;
        }
    }
    if chosen.len() != n {
        return Err(Error::Numerical(format!(
            "found {} boundary wavelets, expected {n}",
            chosen.len()
        )));
    }
    Ok(chosen)
}

/// Builds the left-edge filters for the filter `h`.
pub fn left_edge_filters(h: &[f64]) -> Result<EdgeFilters> {
    let nu = (h.len() / 2) as i64;
    let gram = HalfLineGram::new(h)?;
    let cn = edge_coefficients(nu, &gram)?;
    let phi = edge_refinement(h, &cn, &gram)?;
    let psi = edge_wavelets(h, &phi)?;
    let coef = Matrix::from_fn(cn.len(), cn[0].len(), |i, j| f64::from(cn[i][j]));
    Ok(EdgeFilters {
        coef,
        phi: to_matrix(&phi),
        psi: to_matrix(&psi),
    })
}

/// Runs the full construction for one family and order. The right edge is
/// built from the reflected filter and stored in reflected coordinates.
pub fn build_filter_set(family: Family, nu: usize) -> Result<BoundaryFilterSet> {
    let spec = WaveletSpec::new(family, nu, super::Boundary::Periodic)?;
    let h = spec.taps().to_vec();
    let (left, right) = if nu >= 2 {
        let reflected: Vec<f64> = h.iter().rev().copied().collect();
        (
            Some(left_edge_filters(&h)?),
            Some(left_edge_filters(&reflected)?),
        )
    } else {
        (None, None)
    };
    Ok(BoundaryFilterSet {
        family,
        nu,
        h,
        left,
        right,
    })
}
