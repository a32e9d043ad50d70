//! Matrix-free application of the truncated Walsh-to-wavelet change of basis
//! `P_N U P_M` and its adjoint, in one and two dimensions.
//!
//! Column `m` of the 1D operator holds `<phi_{j,m}, w_n>` for `n < N = 2^{j+q}`.
//! Splitting the support of an interior `phi_{j,m}` into unit cells gives
//!
//! ```text
//! <phi_{j,m}, w_n> = 2^{-j/2} sum_l w_n((l + m) / 2^j) kappa_l(floor(n / 2^j)),
//! ```
//!
//! so the interior part is one sequency FWHT per cell offset `l` of the
//! coefficients embedded at positions `2^q (l + m)`, followed by a blockwise
//! kernel modulation. Since `w_n` is constant on cells of width `1 / N`, a
//! boundary column is the FWHT of the cell masses of its function; all
//! boundary columns share one transform of a sparse vector.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{KernelBlock, KernelTable};
use crate::walsh::{bit_reverse, bit_reverse_permute, fwht_sequency, fwht_sequency_bit_reversed};
use crate::wavelet::{Boundary, Dwt, WaveletSpec};

/// A real linear map between flat vectors together with its transpose.
pub trait LinearOperator: Sync {
    /// Length of the output of [`LinearOperator::apply`].
    fn rows(&self) -> usize;
    /// Length of the input of [`LinearOperator::apply`].
    fn cols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>>;
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Boundary function cell masses placed on the length-`N` grid.
#[derive(Debug, Clone)]
struct EdgeColumn {
    column: usize,
    first: usize,
    masses: Vec<f64>,
}

#[derive(Debug)]
pub struct FastOp {
    spec: WaveletSpec,
    j: u32,
    q: u32,
    dim: usize,
    kernels: KernelTable,
    edges: Vec<EdgeColumn>,
    fwht_calls: AtomicU64,
}

impl Clone for FastOp {
    fn clone(&self) -> Self {
        FastOp {
            spec: self.spec,
            j: self.j,
            q: self.q,
            dim: self.dim,
            kernels: self.kernels.clone(),
            edges: self.edges.clone(),
            fwht_calls: AtomicU64::new(0),
        }
    }
}

fn flat_masses(block: &KernelBlock, q: u32) -> Vec<f64> {
    KernelTable::masses(block, q).concat()
}

impl FastOp {
    /// Builds the operator for `M = 2^j` wavelet coefficients and
    /// `N = 2^{j+q}` Walsh samples per axis. A kernel table with a larger `q`
    /// is truncated.
    pub fn new(
        spec: &WaveletSpec,
        j: u32,
        q: u32,
        dim: usize,
        kernels: &KernelTable,
    ) -> Result<Self> {
        spec.validate()?;
        if spec.nu < 2 {
            return Err(Error::Unsupported(
                "the Haar operator is provided by haar_fullrank".into(),
            ));
        }
        spec.check_level(j)?;
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} is not 1 or 2"
            )));
        }
        if q == 0 {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        if kernels.spec != *spec {
            return Err(Error::HeaderMismatch(format!(
                "kernel table is for {}, operator for {spec}",
                kernels.spec
            )));
        }
        if kernels.q < q {
            return Err(Error::InvalidParameter(format!(
                "kernel table has q = {} < {q}",
                kernels.q
            )));
        }
        if j + q > 40 {
            return Err(Error::SizeGuard(format!("N = 2^{} is too large", j + q)));
        }
        let kernels = if kernels.q == q {
            kernels.clone()
        } else {
            kernels.truncated(q)?
        };
        let m_total = 1usize << j;
        let width = 1usize << q;
        let mut edges = Vec::new();
        if spec.boundary == Boundary::Vmp {
            for (m, block) in kernels.left.iter().enumerate() {
                edges.push(EdgeColumn {
                    column: m,
                    first: 0,
                    masses: flat_masses(block, q),
                });
            }
            for (m, block) in kernels.right.iter().enumerate() {
                let first_cell = (m_total as i64 + block.first_cell) as usize;
                edges.push(EdgeColumn {
                    column: m_total - 1 - m,
                    first: first_cell * width,
                    masses: flat_masses(block, q),
                });
            }
        }
        Ok(FastOp {
            spec: *spec,
            j,
            q,
            dim,
            kernels,
            edges,
            fwht_calls: AtomicU64::new(0),
        })
    }

    /// Builds the operator with a freshly computed kernel table.
    pub fn with_kernels(spec: &WaveletSpec, j: u32, q: u32, dim: usize) -> Result<Self> {
        let table = KernelTable::compute(spec, q, crate::wavelet::DEFAULT_RESOLUTION)?;
        Self::new(spec, j, q, dim, &table)
    }

    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kernels(&self) -> &KernelTable {
        &self.kernels
    }

    /// `M = 2^j`.
    pub fn m(&self) -> usize {
        1 << self.j
    }

    /// `N = 2^{j+q}`.
    pub fn n(&self) -> usize {
        1 << (self.j + self.q)
    }

    /// Number of FWHTs run so far by this operator.
    pub fn fwht_calls(&self) -> u64 {
        self.fwht_calls.load(Ordering::Relaxed)
    }

    pub fn reset_fwht_calls(&self) {
        self.fwht_calls.store(0, Ordering::Relaxed);
    }

    /// Sequency transform left in bit-reversed order.
    fn fwht(&self, v: &mut [f64]) {
        self.fwht_calls.fetch_add(1, Ordering::Relaxed);
        fwht_sequency_bit_reversed(v).expect("power-of-two length");
    }

    /// Bit-reversed position of sequency index `n`.
    fn slot(&self, n: usize) -> usize {
        bit_reverse(n as u64, self.j + self.q) as usize
    }

    /// `scale * kappa_l(s)` for the low `q` bits of a bit-reversed position.
    fn modulation(&self, row: &[f64]) -> Vec<f64> {
        let scale = self.scale();
        (0..1usize << self.q)
            .map(|t| scale * row[bit_reverse(t as u64, self.q) as usize])
            .collect()
    }

    /// Range of columns handled by the interior formula.
    fn interior_columns(&self) -> std::ops::Range<usize> {
        match self.spec.boundary {
            Boundary::Periodic => 0..self.m(),
            Boundary::Vmp => self.spec.nu..self.m() - self.spec.nu,
        }
    }

    fn scale(&self) -> f64 {
        (-(self.j as f64) / 2.0).exp2()
    }

    /// `beta = P_N U P_M xi` for one axis.
    pub fn forward_1d(&self, xi: &[f64]) -> Result<Vec<f64>> {
        check_len(xi.len(), self.m())?;
        let (m_total, n_total) = (self.m(), self.n());
        // Accumulated in bit-reversed order and reordered once at the end.
        let mut out = vec![0.0; n_total];
        let mut buf = vec![0.0; n_total];
        let cols = self.interior_columns();
        for l in self.kernels.interior.cells() {
            // H_l: embed, transform.
            buf.iter_mut().for_each(|x| *x = 0.0);
            for m in cols.clone() {
                let pos = (l + m as i64).rem_euclid(m_total as i64) as usize;
                buf[pos << self.q] += xi[m];
            }
            self.fwht(&mut buf);
            // D_l: modulate block s by kappa_l(s).
            let k = self.modulation(
                &self.kernels.interior.rows[(l - self.kernels.interior.first_cell) as usize],
            );
            for (o, b) in out.chunks_exact_mut(k.len()).zip(buf.chunks_exact(k.len())) {
                for ((x, y), w) in o.iter_mut().zip(b).zip(&k) {
                    *x += w * y;
                }
            }
        }
        if !self.edges.is_empty() {
            buf.iter_mut().for_each(|x| *x = 0.0);
            for e in &self.edges {
                let c = xi[e.column];
                for (x, w) in buf[e.first..e.first + e.masses.len()]
                    .iter_mut()
                    .zip(&e.masses)
                {
                    *x += c * w;
                }
            }
            self.fwht(&mut buf);
            let scale = self.scale();
            for (x, y) in out.iter_mut().zip(&buf) {
                *x += scale * y;
            }
        }
        bit_reverse_permute(&mut out, self.j + self.q);
        Ok(out)
    }

    /// `xi = (P_N U P_M)^T alpha` for one axis.
    pub fn adjoint_1d(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        check_len(alpha.len(), self.n())?;
        let m_total = self.m();
        let scale = self.scale();
        let mut out = vec![0.0; m_total];
        let mut buf = vec![0.0; self.n()];
        let cols = self.interior_columns();
        for l in self.kernels.interior.cells() {
            // D_l then B_l = H_l^T: modulate, transform, gather.
            let row = &self.kernels.interior.rows[(l - self.kernels.interior.first_cell) as usize];
            for (s, (b, a)) in buf
                .chunks_exact_mut(m_total)
                .zip(alpha.chunks_exact(m_total))
                .enumerate()
            {
                let k = scale * row[s];
                for (x, y) in b.iter_mut().zip(a) {
                    *x = k * y;
                }
            }
            self.fwht(&mut buf);
            for m in cols.clone() {
                let pos = (l + m as i64).rem_euclid(m_total as i64) as usize;
                out[m] += buf[self.slot(pos << self.q)];
            }
        }
        if !self.edges.is_empty() {
            for (x, y) in buf.iter_mut().zip(alpha) {
                *x = scale * y;
            }
            self.fwht(&mut buf);
            for e in &self.edges {
                out[e.column] += (e.first..)
                    .zip(&e.masses)
                    .map(|(n, w)| buf[self.slot(n)] * w)
                    .sum::<f64>();
            }
        }
        Ok(out)
    }

    /// `alpha = G xi G^T` with `xi` an `M x M` row-major matrix.
    pub fn forward_2d(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = (self.m(), self.n());
        check_len(xi.len(), m * m)?;
        // Columns: t = G xi, stored transposed (row c of tt is column c of t).
        let tt: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|c| {
                let col: Vec<f64> = (0..m).map(|r| xi[r * m + c]).collect();
                self.forward_1d(&col)
            })
            .collect::<Result<_>>()?;
        // Rows: alpha[r, :] = G t[r, :].
        let mut out = vec![0.0; n * n];
        out.par_chunks_exact_mut(n)
            .enumerate()
            .try_for_each(|(r, dst)| -> Result<()> {
                let row: Vec<f64> = tt.iter().map(|col| col[r]).collect();
                dst.copy_from_slice(&self.forward_1d(&row)?);
                Ok(())
            })?;
        Ok(out)
    }

    /// `xi = G^T alpha G` with `alpha` an `N x N` row-major matrix.
    pub fn adjoint_2d(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = (self.m(), self.n());
        check_len(alpha.len(), n * n)?;
        // Rows: s[r, :] = G^T alpha[r, :], an N x M matrix.
        let s: Vec<Vec<f64>> = alpha
            .par_chunks_exact(n)
            .map(|row| self.adjoint_1d(row))
            .collect::<Result<_>>()?;
        // Columns: xi[:, c] = G^T s[:, c].
        let cols: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|c| {
                let col: Vec<f64> = s.iter().map(|row| row[c]).collect();
                self.adjoint_1d(&col)
            })
            .collect::<Result<_>>()?;
        let mut out = vec![0.0; m * m];
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                out[r * m + c] = *v;
            }
        }
        Ok(out)
    }
}

impl LinearOperator for FastOp {
    fn rows(&self) -> usize {
        self.n().pow(self.dim as u32)
    }

    fn cols(&self) -> usize {
        self.m().pow(self.dim as u32)
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.dim == 1 {
            self.forward_1d(x)
        } else {
            self.forward_2d(x)
        }
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        if self.dim == 1 {
            self.adjoint_1d(y)
        } else {
            self.adjoint_2d(y)
        }
    }
}

/// Sorted, duplicate-free sample indices into `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    indices: Vec<usize>,
    size: usize,
}

impl SamplingMask {
    pub fn new(mut indices: Vec<usize>, size: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("mask has repeated indices".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= size {
                return Err(Error::InvalidParameter(format!(
                    "mask index {last} is out of range for {size} samples"
                )));
            }
        }
        Ok(SamplingMask { indices, size })
    }

    pub fn full(size: usize) -> Self {
        SamplingMask {
            indices: (0..size).collect(),
            size,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of samples in the full grid.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn restrict(&self, y: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| y[i]).collect()
    }

    pub fn scatter(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for (&i, v) in self.indices.iter().zip(y) {
            out[i] = *v;
        }
        out
    }
}

/// Orthogonal wavelet synthesis on one axis or separably on both axes.
#[derive(Debug, Clone)]
pub struct WaveletSynthesis {
    dwt: Dwt,
    m: usize,
    dim: usize,
}

impl WaveletSynthesis {
    pub fn new(spec: &WaveletSpec, j: u32, dim: usize) -> Result<Self> {
        Ok(WaveletSynthesis {
            dwt: Dwt::new(spec, j)?,
            m: 1 << j,
            dim,
        })
    }

    fn separable(
        &self,
        x: &[f64],
        f: impl Fn(&Dwt, &[f64]) -> Result<Vec<f64>> + Sync,
    ) -> Result<Vec<f64>> {
        let m = self.m;
        if self.dim == 1 {
            return f(&self.dwt, x);
        }
        check_len(x.len(), m * m)?;
        let mut rows: Vec<f64> = Vec::with_capacity(m * m);
        let done: Vec<Vec<f64>> = x
            .par_chunks_exact(m)
            .map(|r| f(&self.dwt, r))
            .collect::<Result<_>>()?;
        for r in done {
            rows.extend(r);
        }
        let cols: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|c| {
                let col: Vec<f64> = (0..m).map(|r| rows[r * m + c]).collect();
                f(&self.dwt, &col)
            })
            .collect::<Result<_>>()?;
        let mut out = vec![0.0; m * m];
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                out[r * m + c] = *v;
            }
        }
        Ok(out)
    }

    /// Wavelet coefficients to scaling coefficients (`W^{-1}`).
    pub fn synthesize(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.separable(w, |d, x| d.inverse(x))
    }

    /// Scaling coefficients to wavelet coefficients (`W`).
    pub fn analyze(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.separable(c, |d, x| d.forward(x))
    }
}

/// `P_Omega A` or `P_Omega A W^{-1}` for compressive sensing.
pub struct ComposedOp<'a> {
    op: &'a dyn LinearOperator,
    mask: SamplingMask,
    synthesis: Option<WaveletSynthesis>,
}

/// Restricts `op` to the samples in `mask`, optionally composed with the
/// inverse DWT so that the unknowns are wavelet coefficients.
pub fn compose_cs<'a>(
    op: &'a FastOp,
    mask: SamplingMask,
    use_idwt: bool,
) -> Result<ComposedOp<'a>> {
    if mask.size() != op.rows() {
        return Err(Error::InvalidParameter(format!(
            "mask covers {} samples, operator has {}",
            mask.size(),
            op.rows()
        )));
    }
    let synthesis = if use_idwt {
        Some(WaveletSynthesis::new(op.spec(), op.j(), op.dim())?)
    } else {
        None
    };
    Ok(ComposedOp {
        op,
        mask,
        synthesis,
    })
}

impl ComposedOp<'_> {
    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }
}

impl LinearOperator for ComposedOp<'_> {
    fn rows(&self) -> usize {
        self.mask.len()
    }

    fn cols(&self) -> usize {
        self.op.cols()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x.len(), self.cols())?;
        let full = match &self.synthesis {
            Some(s) => self.op.apply(&s.synthesize(x)?)?,
            None => self.op.apply(x)?,
        };
        Ok(self.mask.restrict(&full))
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(y.len(), self.rows())?;
        let back = self.op.apply_adjoint(&self.mask.scatter(y))?;
        match &self.synthesis {
            Some(s) => s.analyze(&back),
            None => Ok(back),
        }
    }
}

/// `P_M U P_M = H W^{-1}` for the Haar wavelet with `N = M`: normalized
/// sequency Hadamard transform after the Haar inverse DWT. Orthogonal.
#[derive(Debug, Clone)]
pub struct HaarFullRank {
    dwt: Dwt,
    m: usize,
}

pub fn haar_fullrank(j: u32) -> Result<HaarFullRank> {
    let spec = WaveletSpec::daubechies(1, Boundary::Periodic)?;
    Ok(HaarFullRank {
        dwt: Dwt::new(&spec, j)?,
        m: 1 << j,
    })
}

impl LinearOperator for HaarFullRank {
    fn rows(&self) -> usize {
        self.m
    }

    fn cols(&self) -> usize {
        self.m
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut v = self.dwt.inverse(x)?;
        fwht_sequency(&mut v)?;
        let s = 1.0 / (self.m as f64).sqrt();
        v.iter_mut().for_each(|x| *x *= s);
        Ok(v)
    }

    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(y.len(), self.m)?;
        let mut v = y.to_vec();
        fwht_sequency(&mut v)?;
        let s = 1.0 / (self.m as f64).sqrt();
        v.iter_mut().for_each(|x| *x *= s);
        self.dwt.forward(&v)
    }
}

/// Zero-pads `v` to the next power of two.
pub fn pad_to_power_of_two(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(v.len().max(1).next_power_of_two(), 0.0);
    out
}

/// Zero-pads a `rows x cols` row-major matrix to a square power-of-two size.
pub fn pad_matrix_to_power_of_two(
    v: &[f64],
    rows: usize,
    cols: usize,
) -> Result<(Vec<f64>, usize)> {
    check_len(v.len(), rows * cols)?;
    let n = rows.max(cols).max(1).next_power_of_two();
    let mut out = vec![0.0; n * n];
    for r in 0..rows {
        out[r * n..r * n + cols].copy_from_slice(&v[r * cols..(r + 1) * cols]);
    }
    Ok((out, n))
}
