//! Dense construction of `P_N U P_M` for small sizes, subspace angles and
//! stable sampling rates.

use crate::error::{Error, Result};
use crate::fastop::{FastOp, LinearOperator};
use crate::kernel::{KernelBlock, KernelTable};
use crate::linalg;
use crate::walsh::{fwht_sequency, walsh_sign};
use crate::wavelet::{
    cascade, edge_cascades, Boundary, ScalingSamples, WaveletSpec, Which, DEFAULT_RESOLUTION,
};

/// Largest number of dense entries `N * M` accepted.
pub const DENSE_ENTRY_LIMIT: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenseMethod {
    /// Kernel tables combined with Walsh values at dyadic points.
    Lemma,
    /// Cascade samples integrated against `w_n` cell by cell.
    Quadrature,
}

/// Dense `N x M` change-of-basis matrix, row `n`, column `m`.
#[derive(Debug, Clone)]
pub struct DenseCob {
    pub matrix: Vec<Vec<f64>>,
    pub spec: WaveletSpec,
    pub j: u32,
    pub q: u32,
}

impl DenseCob {
    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols()];
        for row in &self.matrix {
            for (a, v) in s.iter_mut().zip(row) {
                *a += v * v;
            }
        }
        s.into_iter().map(f64::sqrt).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleReport {
    /// `1 / sigma_min`, infinite when `sigma_min < 1e-12`.
    pub mu: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub cond: f64,
}

fn check_size(j: u32, q: u32, dim: usize) -> Result<()> {
    let entries = 1u128 << ((2 * j + q) as usize * dim);
    if j + q > 40 || entries > DENSE_ENTRY_LIMIT as u128 {
        return Err(Error::SizeGuard(format!(
            "dense matrix with j = {j}, q = {q} has more than 2^26 entries"
        )));
    }
    Ok(())
}

/// Dense matrix with kernels computed at the default resolution.
pub fn build_dense(spec: &WaveletSpec, j: u32, q: u32, method: DenseMethod) -> Result<DenseCob> {
    spec.validate()?;
    spec.check_level(j)?;
    check_size(j, q, 1)?;
    match method {
        DenseMethod::Lemma => {
            let table = KernelTable::compute(spec, q, DEFAULT_RESOLUTION)?;
            build_dense_lemma(&table, j, q)
        }
        DenseMethod::Quadrature => build_dense_quadrature(spec, j, q, DEFAULT_RESOLUTION),
    }
}

/// Lemma method from a precomputed table (`table.q >= q`).
pub fn build_dense_lemma(table: &KernelTable, j: u32, q: u32) -> Result<DenseCob> {
    let spec = table.spec;
    spec.check_level(j)?;
    check_size(j, q, 1)?;
    let table = if table.q == q {
        table.clone()
    } else if table.q > q {
        table.truncated(q)?
    } else {
        return Err(Error::InvalidParameter(format!(
            "kernel table has q = {} < {q}",
            table.q
        )));
    };
    let nu = spec.nu as i64;
    let m_total = 1i64 << j;
    let n_total = 1usize << (j + q);
    let scale = (-(j as f64) / 2.0).exp2();
    // Column m as a list of (dyadic numerator at scale j, kernel block).
    let column = |m: i64| -> Vec<(i64, &KernelBlock, i64)> {
        let vmp = spec.boundary == Boundary::Vmp;
        if vmp && m < nu {
            let b = &table.left[m as usize];
            b.cells().map(|l| (l, b, l)).collect()
        } else if vmp && m >= m_total - nu {
            let b = &table.right[(m_total - 1 - m) as usize];
            b.cells().map(|l| (m_total + l, b, l)).collect()
        } else {
            let b = &table.interior;
            b.cells()
                .map(|l| ((l + m).rem_euclid(m_total), b, l))
                .collect()
        }
    };
    let columns: Vec<_> = (0..m_total).map(column).collect();
    let matrix = (0..n_total as u64)
        .map(|n| {
            let s = (n >> j) as usize;
            columns
                .iter()
                .map(|terms| {
                    scale
                        * terms
                            .iter()
                            .map(|&(p, b, l)| walsh_sign(n, p as u64, j) * b.get(l, s))
                            .sum::<f64>()
                })
                .collect()
        })
        .collect();
    Ok(DenseCob { matrix, spec, j, q })
}

/// Quadrature method: trapezoid cell masses of each `phi_{j,m}` on the grid
/// of width `1 / N`, then `<phi_{j,m}, w_n> = sum_i w_n(i / N) mass_i`.
pub fn build_dense_quadrature(
    spec: &WaveletSpec,
    j: u32,
    q: u32,
    resolution: u32,
) -> Result<DenseCob> {
    spec.validate()?;
    spec.check_level(j)?;
    check_size(j, q, 1)?;
    if resolution < q {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} is below q = {q}"
        )));
    }
    let nu = spec.nu as i64;
    let m_total = 1i64 << j;
    let n_total = 1i64 << (j + q);
    let interior = cascade(spec, Which::Interior, resolution)?;
    let edges = if spec.boundary == Boundary::Vmp {
        Some(edge_cascades(spec, resolution)?)
    } else {
        None
    };
    let scale = (-(j as f64) / 2.0).exp2();
    let masses = |f: &CellMasses, offset: i64, wrap: bool| -> Vec<f64> {
        let shifts: &[i64] = if wrap { &[-1, 0, 1] } else { &[0] };
        (0..n_total)
            .map(|i| {
                scale
                    * shifts
                        .iter()
                        .map(|k| f.get(i + offset + k * n_total))
                        .sum::<f64>()
            })
            .collect()
    };
    let interior = CellMasses::new(&interior, q, spec.nu == 1);
    let edges = edges.map(|(l, r)| {
        let cells = |v: Vec<ScalingSamples>| {
            v.iter()
                .map(|f| CellMasses::new(f, q, false))
                .collect::<Vec<_>>()
        };
        (cells(l), cells(r))
    });
    let mut columns = Vec::with_capacity(m_total as usize);
    for m in 0..m_total {
        let mut col = match &edges {
            Some((left, _)) if m < nu => masses(&left[m as usize], 0, false),
            Some((_, right)) if m >= m_total - nu => {
                masses(&right[(m_total - 1 - m) as usize], -n_total, false)
            }
            Some(_) => masses(&interior, -(m << q), false),
            None => masses(&interior, -(m << q), true),
        };
        fwht_sequency(&mut col)?;
        columns.push(col);
    }
    let matrix = (0..n_total as usize)
        .map(|n| columns.iter().map(|c| c[n]).collect())
        .collect();
    Ok(DenseCob {
        matrix,
        spec: *spec,
        j,
        q,
    })
}

/// Integrals of a sampled function over the cells `[a, a + 1] / 2^q`.
struct CellMasses {
    first: i64,
    values: Vec<f64>,
}

impl CellMasses {
    fn new(f: &ScalingSamples, q: u32, indicator: bool) -> Self {
        let width = 1i64 << (f.resolution - q);
        let (lo, hi) = f.support();
        let first = lo.div_euclid(width);
        let last = (hi + width - 1).div_euclid(width);
        let values = (first..last)
            .map(|a| {
                if indicator {
                    // The Haar function jumps at the ends of its support.
                    if a * width >= lo && (a + 1) * width <= hi {
                        (-(q as f64)).exp2()
                    } else {
                        0.0
                    }
                } else {
                    f.trapezoid(a * width, (a + 1) * width)
                }
            })
            .collect();
        CellMasses { first, values }
    }

    fn get(&self, a: i64) -> f64 {
        let i = a - self.first;
        if i < 0 {
            0.0
        } else {
            self.values.get(i as usize).copied().unwrap_or(0.0)
        }
    }
}

/// Dense matrix assembled from the fast operator applied to unit vectors.
pub fn dense_from_operator(op: &FastOp) -> Result<DenseCob> {
    if op.dim() != 1 {
        return Err(Error::InvalidParameter(
            "dense assembly needs a 1D operator".into(),
        ));
    }
    check_size(op.j(), op.q(), 1)?;
    let m = op.m();
    let mut matrix = vec![vec![0.0; m]; op.n()];
    let mut e = vec![0.0; m];
    for c in 0..m {
        e[c] = 1.0;
        for (row, v) in matrix.iter_mut().zip(op.apply(&e)?) {
            row[c] = v;
        }
        e[c] = 0.0;
    }
    Ok(DenseCob {
        matrix,
        spec: *op.spec(),
        j: op.j(),
        q: op.q(),
    })
}

pub fn subspace_angle(dense: &DenseCob) -> Result<AngleReport> {
    let (n, m) = (dense.rows(), dense.cols());
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "N = {n} is smaller than M = {m}"
        )));
    }
    let s = linalg::singular_values(&dense.matrix, m)?;
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_min = s.last().copied().unwrap_or(0.0);
    let mu = if sigma_min < 1e-12 {
        f64::INFINITY
    } else {
        1.0 / sigma_min
    };
    Ok(AngleReport {
        mu,
        sigma_max,
        sigma_min,
        cond: sigma_max * mu,
    })
}

/// `mu` of the two-dimensional tensor operator from the one-dimensional one.
pub fn tensor_mu(report: &AngleReport) -> f64 {
    report.mu * report.mu
}

/// For each `j`, the smallest `q <= q_max` with `mu <= gamma`, or `None` if
/// none qualifies before `q_max` or the dense size guard.
pub fn stable_sampling_probe(
    spec: &WaveletSpec,
    js: &[u32],
    gamma: f64,
    q_max: u32,
) -> Result<Vec<(u32, Option<u32>)>> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must exceed 1"
        )));
    }
    let table = KernelTable::compute(spec, q_max.max(1), DEFAULT_RESOLUTION)?;
    js.iter()
        .map(|&j| {
            for q in 1..=q_max {
                if check_size(j, q, 1).is_err() {
                    break;
                }
                let report = subspace_angle(&build_dense_lemma(&table, j, q)?)?;
                if report.mu <= gamma {
                    return Ok((j, Some(q)));
                }
            }
            Ok((j, None))
        })
        .collect()
}
