use super::filters::{load_filters, BoundaryFilterSet, Matrix};
use super::{highpass, Boundary, WaveletSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

type SparseRow = Vec<(usize, f64)>;

/// One analysis step from `2^r` fine coefficients to `2^(r-1)` scaling and
/// `2^(r-1)` wavelet coefficients. Rows are orthonormal.
#[derive(Debug, Clone)]
struct Level {
    fine: usize,
    rows: Vec<SparseRow>,
}

impl Level {
    fn periodic(h: &[f64], g: &[f64], r: u32) -> Level {
        let fine = 1usize << r;
        let nu = (h.len() / 2) as i64;
        let mut rows = Vec::with_capacity(fine);
        for filt in [h, g] {
            for k in 0..fine / 2 {
                let mut row: SparseRow = Vec::new();
                for (i, &c) in filt.iter().enumerate() {
                    let t = i as i64 - nu + 1;
                    let idx = (2 * k as i64 + t).rem_euclid(fine as i64) as usize;
                    match row.iter_mut().find(|(j, _)| *j == idx) {
                        Some(e) => e.1 += c,
                        None => row.push((idx, c)),
                    }
                }
                rows.push(row);
            }
        }
        Level { fine, rows }
    }

    fn vmp(set: &BoundaryFilterSet, r: u32) -> Result<Level> {
        let fine = 1usize << r;
        let coarse = fine / 2;
        let nu = set.nu;
        let left = set.left()?;
        let right = set.right()?;
        let g = set.highpass();
        let from_dense = |m: &Matrix, row: usize, mirror: bool| -> SparseRow {
            m.row(row)
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, &v)| (if mirror { fine - 1 - i } else { i }, v))
                .collect()
        };
        let interior = |filt: &[f64], k: usize| -> SparseRow {
            filt.iter()
                .enumerate()
                .map(|(i, &c)| ((2 * k + i + 1) - nu, c))
                .collect()
        };
        let mut rows = vec![Vec::new(); fine];
        for m in 0..nu {
            rows[m] = from_dense(&left.phi, m, false);
            rows[coarse - 1 - m] = from_dense(&right.phi, m, true);
            rows[coarse + m] = from_dense(&left.psi, m, false);
            rows[fine - 1 - m] = from_dense(&right.psi, m, true);
        }
        for k in nu..coarse - nu {
            rows[k] = interior(&set.h, k);
            rows[coarse + k] = interior(&g, k);
        }
        for row in &rows {
            if row.iter().any(|(i, _)| *i >= fine) {
                return Err(Error::Numerical(format!(
                    "level {r} is too small for the boundary filters"
                )));
            }
        }
        // At the coarsest levels the edge functions of both sides overlap.
        // Wavelet rows are then projected onto the complement of the scaling
        // rows (and of the wavelet rows already accepted); elsewhere this is
        // a no-op.
        let densify = |row: &SparseRow| {
            let mut v = vec![0.0; fine];
            for &(i, x) in row {
                v[i] += x;
            }
            v
        };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let reach = |ids: &mut dyn Iterator<Item = usize>, max: bool| {
            let it = ids.flat_map(|r| rows[r].iter().map(|e| e.0));
            if max {
                it.max().unwrap_or(0)
            } else {
                it.min().unwrap_or(fine)
            }
        };
        let left_end = reach(&mut (0..nu).chain(coarse..coarse + nu), true);
        let right_start = reach(&mut (coarse - nu..coarse).chain(fine - nu..fine), false);
        if left_end < right_start {
            return Ok(Level { fine, rows });
        }
        let mut basis: Vec<Vec<f64>> = rows[..coarse].iter().map(densify).collect();
        let order = (0..nu)
            .map(|m| coarse + m)
            .chain((0..nu).map(|m| fine - 1 - m))
            .chain(coarse + nu..fine - nu);
        for idx in order {
            let mut v = densify(&rows[idx]);
            let mut touched = false;
            for _ in 0..2 {
                for b in &basis {
                    let ip = dot(b, &v);
                    if ip.abs() > 1e-15 {
                        touched = true;
                        for (x, y) in v.iter_mut().zip(b) {
                            *x -= ip * y;
                        }
                    }
                }
            }
            if touched {
                let norm = dot(&v, &v).sqrt();
                if norm < 1e-8 {
                    return Err(Error::Numerical(
                        "boundary wavelets are linearly dependent".into(),
                    ));
                }
                v.iter_mut().for_each(|x| *x /= norm);
                rows[idx] = v
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| **x != 0.0)
                    .map(|(i, &x)| (i, x))
                    .collect();
            }
            basis.push(v);
        }
        Ok(Level { fine, rows })
    }

    fn analyze(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(i, v)| v * x[i]).sum();
        }
    }

    fn synthesize(&self, c: &[f64], out: &mut [f64]) {
        out[..self.fine].iter_mut().for_each(|x| *x = 0.0);
        for (&ci, row) in c.iter().zip(&self.rows) {
            for &(i, v) in row {
                out[i] += v * ci;
            }
        }
    }
}

/// Multi-level orthogonal DWT on `2^j` coefficients down to the coarsest
/// admissible level.
///
/// Output layout: `[scaling (2^j0) | details j0 | details j0+1 | ... | details j-1]`.
#[derive(Debug, Clone)]
pub struct Dwt {
    j: u32,
    coarsest: u32,
    levels: Vec<Level>,
}

impl Dwt {
    pub fn new(spec: &WaveletSpec, j: u32) -> Result<Self> {
        spec.validate()?;
        spec.check_level(j)?;
        let coarsest = if spec.nu == 1 { 0 } else { spec.j0() };
        let levels = match spec.boundary {
            Boundary::Periodic => {
                let h = spec.taps();
                let g = highpass(h);
                (coarsest + 1..=j)
                    .map(|r| Level::periodic(h, &g, r))
                    .collect()
            }
            Boundary::Vmp => {
                let set = load_filters(spec)?;
                (coarsest + 1..=j)
                    .map(|r| Level::vmp(&set, r))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Dwt {
            j,
            coarsest,
            levels,
        })
    }

    pub fn len(&self) -> usize {
        1 << self.j
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coarsest_level(&self) -> u32 {
        self.coarsest
    }

    /// Scaling coefficients at level `j` to wavelet coefficients.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut c = x.to_vec();
        let mut buf = vec![0.0; x.len()];
        for level in self.levels.iter().rev() {
            let n = level.fine;
            level.analyze(&c[..n], &mut buf[..n]);
            c[..n].copy_from_slice(&buf[..n]);
        }
        Ok(c)
    }

    /// Wavelet coefficients back to scaling coefficients at level `j`.
    pub fn inverse(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check(w)?;
        let mut c = w.to_vec();
        let mut buf = vec![0.0; w.len()];
        for level in &self.levels {
            let n = level.fine;
            level.synthesize(&c[..n], &mut buf);
            c[..n].copy_from_slice(&buf[..n]);
        }
        Ok(c)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.len() {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                got: x.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// One-shot DWT or inverse DWT of `2^j` coefficients.
pub fn dwt_matrix_apply(
    spec: &WaveletSpec,
    j: u32,
    coeffs: &[f64],
    direction: Direction,
) -> Result<Vec<f64>> {
    let dwt = Dwt::new(spec, j)?;
    match direction {
        Direction::Forward => dwt.forward(coeffs),
        Direction::Inverse => dwt.inverse(coeffs),
    }
}
