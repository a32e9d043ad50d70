//! Sample acquisition, the three reconstruction methods and sampling
//! patterns.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fastop::{FastOp, LinearOperator, SamplingMask};
use crate::functions::TestFunction;
use crate::kernel::KernelTable;
use crate::walsh::fwht_sequency;
use crate::wavelet::{
    cascade, edge_cascades, Boundary, ScalingSamples, WaveletSpec, Which, DEFAULT_RESOLUTION,
};

/// Extra dyadic levels of the acquisition grid beyond `log2 N`.
pub const DEFAULT_OVERSAMPLING: u32 = 4;

/// Walsh samples `<f, w_n>` for `n < N` per axis, row-major in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub values: Vec<f64>,
    pub n: usize,
    pub dim: usize,
}

fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        Err(Error::NotPowerOfTwo(n))
    } else {
        Ok(n.trailing_zeros())
    }
}

/// Midpoint samples of `f` on a `2^resolution` grid followed by a scaled
/// FWHT. Exact for the piecewise-constant interpolant of those samples.
pub fn acquire_samples(f: &TestFunction, n: usize, resolution: u32) -> Result<Samples> {
    let bits = log2_exact(n)?;
    if resolution < bits || resolution > 24 {
        return Err(Error::InvalidParameter(format!(
            "acquisition resolution {resolution} must lie in {bits}..=24"
        )));
    }
    let len = 1usize << resolution;
    let h = 1.0 / len as f64;
    let mid = |p: usize| (p as f64 + 0.5) * h;
    match f {
        TestFunction::OneD(g) => {
            let mut v: Vec<f64> = (0..len).map(|p| g(mid(p)) * h).collect();
            fwht_sequency(&mut v)?;
            v.truncate(n);
            Ok(Samples {
                values: v,
                n,
                dim: 1,
            })
        }
        TestFunction::TwoD(g) => {
            // Rows first, keeping the first n sequencies of each row.
            let mut rows = vec![0.0; len * n];
            let mut row = vec![0.0; len];
            for r in 0..len {
                for (c, x) in row.iter_mut().enumerate() {
                    *x = g(mid(r), mid(c)) * h * h;
                }
                fwht_sequency(&mut row)?;
                rows[r * n..(r + 1) * n].copy_from_slice(&row[..n]);
            }
            let mut out = vec![0.0; n * n];
            let mut col = vec![0.0; len];
            for c in 0..n {
                for (r, x) in col.iter_mut().enumerate() {
                    *x = rows[r * n + c];
                }
                fwht_sequency(&mut col)?;
                for r in 0..n {
                    out[r * n + c] = col[r];
                }
            }
            Ok(Samples {
                values: out,
                n,
                dim: 2,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgParams {
    pub max_iters: usize,
    /// Relative normal-equation residual `|A^T (y - A x)| / |A^T y|`.
    pub residual_tol: f64,
}

impl Default for CgParams {
    fn default() -> Self {
        CgParams {
            max_iters: 1000,
            residual_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdParams {
    pub max_iters: usize,
    pub tol: f64,
    pub eta: f64,
    /// Primal and dual steps; `None` picks `1 / (10 |A|)` and `10 / |A|`.
    pub steps: Option<(f64, f64)>,
}

impl Default for PdParams {
    fn default() -> Self {
        PdParams {
            max_iters: 5000,
            tol: 1e-6,
            eta: 1e-3,
            steps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverParams {
    pub cg: CgParams,
    pub pd: PdParams,
    /// PBDW truncation `K`; `None` means `4N`.
    pub pbdw_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// CG on `A^T A x = A^T y` in the CGLS arrangement, starting from `x0`.
/// With `target`, also stops once `|y - A x|^2 <= target`.
fn cgls(
    op: &dyn LinearOperator,
    y: &[f64],
    x0: Vec<f64>,
    params: &CgParams,
    target: Option<f64>,
) -> Result<SolveReport> {
    if y.len() != op.rows() {
        return Err(Error::DimensionMismatch {
            expected: op.rows(),
            got: y.len(),
        });
    }
    let mut x = x0;
    let mut r: Vec<f64> = y.to_vec();
    axpy(&mut r, -1.0, &op.apply(&x)?);
    let scale = norm(&op.apply_adjoint(y)?);
    let mut s = op.apply_adjoint(&r)?;
    let reached = |r: &[f64]| target.is_some_and(|t| dot(r, r) <= t);
    if scale == 0.0 || norm(&s) <= params.residual_tol * scale || reached(&r) {
        let residual = if scale == 0.0 { 0.0 } else { norm(&s) / scale };
        return Ok(SolveReport {
            x,
            iterations: 0,
            residual,
        });
    }
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    for it in 1..=params.max_iters {
        let q = op.apply(&p)?;
        let qq = dot(&q, &q);
        if qq == 0.0 {
            return Err(Error::Numerical(
                "operator annihilates a search direction".into(),
            ));
        }
        let alpha = gamma / qq;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &q);
        s = op.apply_adjoint(&r)?;
        let next = dot(&s, &s);
        let residual = next.sqrt() / scale;
        if residual <= params.residual_tol || reached(&r) {
            return Ok(SolveReport {
                x,
                iterations: it,
                residual,
            });
        }
        let beta = next / gamma;
        gamma = next;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    Err(Error::NoConvergence {
        iters: params.max_iters,
        residual: gamma.sqrt() / scale,
    })
}

/// Generalised sampling: least squares `min |A x - y|` by conjugate gradients.
pub fn gs_solve(op: &dyn LinearOperator, y: &[f64], params: &CgParams) -> Result<SolveReport> {
    if op.rows() < op.cols() {
        return Err(Error::InvalidParameter(format!(
            "generalised sampling needs N >= M, got {} samples for {} unknowns",
            op.rows(),
            op.cols()
        )));
    }
    cgls(op, y, vec![0.0; op.cols()], params, None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbdwResult {
    /// Walsh coefficients of the estimate for `n < K` per axis, row-major in 2D.
    pub coefficients: Vec<f64>,
    pub k: usize,
    pub gs: SolveReport,
    /// `y - A x` for the GS estimate: the untruncated estimate is the GS
    /// function plus `sum_n correction_n w_n` over `n < N`.
    pub correction: Vec<f64>,
}

/// PBDW: the samples themselves plus the Walsh coefficients `N..K` of the
/// generalised-sampling estimate. `kernels` must cover the taller operator
/// when given; otherwise they are computed.
pub fn pbdw_solve(
    op: &FastOp,
    y: &[f64],
    params: &SolverParams,
    kernels: Option<&KernelTable>,
) -> Result<PbdwResult> {
    let n = op.n();
    let k = params.pbdw_k.unwrap_or(4 * n);
    if k < n || !k.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "PBDW truncation K = {k} must be a power of two no smaller than N = {n}"
        )));
    }
    let gs = gs_solve(op, y, &params.cg)?;
    let correction: Vec<f64> = y.iter().zip(op.apply(&gs.x)?).map(|(a, b)| a - b).collect();
    let tall_q = op.q() + (k / n).trailing_zeros();
    let dim = op.dim();
    if k == n {
        return Ok(PbdwResult {
            coefficients: y.to_vec(),
            k,
            gs,
            correction,
        });
    }
    let computed;
    let table = match kernels {
        Some(t) if t.q >= tall_q => t,
        _ if op.kernels().q >= tall_q => op.kernels(),
        _ => {
            computed = KernelTable::compute(op.spec(), tall_q, DEFAULT_RESOLUTION)?;
            &computed
        }
    };
    let tall = FastOp::new(op.spec(), op.j(), tall_q, dim, table)?;
    let mut coefficients = tall.apply(&gs.x)?;
    if dim == 1 {
        coefficients[..n].copy_from_slice(y);
    } else {
        for r in 0..n {
            coefficients[r * k..r * k + n].copy_from_slice(&y[r * n..(r + 1) * n]);
        }
    }
    Ok(PbdwResult {
        coefficients,
        k,
        gs,
        correction,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `|A x - y|^2` at return.
    pub residual_sq: f64,
    /// `max(0, |A x_k - y|^2 - eta)` per iteration.
    pub feasibility_gaps: Vec<f64>,
}

fn operator_norm(op: &dyn LinearOperator) -> Result<f64> {
    let n = op.cols();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let mut est = 0.0;
    for _ in 0..40 {
        let nv = norm(&v);
        if nv == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= nv);
        v = op.apply_adjoint(&op.apply(&v)?)?;
        est = norm(&v);
    }
    Ok(est.sqrt())
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Quadratically constrained basis pursuit
/// `min |z|_1 subject to |A z - y|^2 <= eta` by the Chambolle-Pock
/// primal-dual iteration.
pub fn cs_solve(op: &dyn LinearOperator, y: &[f64], params: &PdParams) -> Result<CsReport> {
    if y.len() != op.rows() {
        return Err(Error::DimensionMismatch {
            expected: op.rows(),
            got: y.len(),
        });
    }
    if !(params.eta >= 0.0) || !(params.tol > 0.0) {
        return Err(Error::InvalidParameter(
            "eta must be >= 0 and tol > 0".into(),
        ));
    }
    let (tau, sigma) = match params.steps {
        Some(s) => s,
        None => {
            let l = operator_norm(op)? * 1.01;
            if l == 0.0 {
                (1.0, 1.0)
            } else {
                (0.1 / l, 10.0 / l)
            }
        }
    };
    let radius = params.eta.sqrt();
    let (m, n) = (op.rows(), op.cols());
    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; m];
    let mut u = vec![0.0; m];
    let mut gaps = Vec::new();
    let mut iterations = 0;
    let residual_sq = |ax: &[f64]| ax.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    for it in 1..=params.max_iters {
        iterations = it;
        let atu = op.apply_adjoint(&u)?;
        let next: Vec<f64> = x
            .iter()
            .zip(&atu)
            .map(|(xi, gi)| soft_threshold(xi - tau * gi, tau))
            .collect();
        let bar: Vec<f64> = next.iter().zip(&x).map(|(a, b)| 2.0 * a - b).collect();
        let abar = op.apply(&bar)?;
        // prox of sigma F* with F the indicator of the ball around y.
        axpy(&mut u, sigma, &abar);
        let w: Vec<f64> = u.iter().zip(y).map(|(ui, yi)| ui / sigma - yi).collect();
        let wn = norm(&w);
        let shrink = if wn > radius { radius / wn } else { 1.0 };
        for ((ui, wi), yi) in u.iter_mut().zip(&w).zip(y) {
            *ui -= sigma * (yi + wi * shrink);
        }
        let change = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        // A x_{k+1} = (A xbar + A x_k) / 2.
        for (a, b) in ax.iter_mut().zip(&abar) {
            *a = 0.5 * (*a + b);
        }
        x = next;
        let res = residual_sq(&ax);
        gaps.push((res - params.eta).max(0.0));
        if change <= params.tol * norm(&x).max(1.0) && res <= params.eta + params.tol {
            break;
        }
    }
    let mut res = residual_sq(&ax);
    if res > params.eta + params.tol {
        // Move towards the least-squares solution until the constraint holds.
        let target = params.eta + 0.5 * params.tol;
        let ls = match cgls(op, y, x.clone(), &CgParams::default(), Some(target)) {
            Err(Error::NoConvergence { .. }) => {
                let cg = CgParams {
                    max_iters: 20_000,
                    residual_tol: 1e-14,
                };
                cgls(op, y, x.clone(), &cg, Some(target))?
            }
            other => other?,
        };
        let als = op.apply(&ls.x)?;
        let ls_res = residual_sq(&als);
        if ls_res > params.eta + params.tol {
            return Err(Error::Infeasible {
                residual: ls_res,
                eta: params.eta,
            });
        }
        let r0: Vec<f64> = ax.iter().zip(y).map(|(a, b)| a - b).collect();
        let d: Vec<f64> = als.iter().zip(&ax).map(|(a, b)| a - b).collect();
        let (qa, qb, qc) = (dot(&d, &d), 2.0 * dot(&r0, &d), dot(&r0, &r0) - params.eta);
        let t = if qa == 0.0 {
            1.0
        } else {
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
            ((-qb - disc.sqrt()) / (2.0 * qa)).clamp(0.0, 1.0)
        };
        let t = if residual_at(t, &r0, &d) <= params.eta + params.tol {
            t
        } else {
            1.0
        };
        for (xi, li) in x.iter_mut().zip(&ls.x) {
            *xi += t * (li - *xi);
        }
        ax = op.apply(&x)?;
        res = residual_sq(&ax);
    }
    Ok(CsReport {
        x,
        iterations,
        residual_sq: res,
        feasibility_gaps: gaps,
    })
}

fn residual_at(t: f64, r0: &[f64], d: &[f64]) -> f64 {
    r0.iter().zip(d).map(|(a, b)| (a + t * b).powi(2)).sum()
}

/// Variable-density pattern parameters: every index below `floor` (per axis)
/// is sampled, the rest with weight `2^{-decay * band}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    pub floor: usize,
    pub decay: f64,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams {
            floor: 8,
            decay: 1.0,
        }
    }
}

/// Dyadic band of a sequency index: 0 for `n = 0`, else `floor(log2 n) + 1`.
pub fn band(n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        usize::BITS - n.leading_zeros()
    }
}

/// Seeded variable-density mask of exactly `m` indices out of `N^dim`.
pub fn variable_density_mask(
    n: usize,
    dim: usize,
    m: usize,
    seed: u64,
    params: &DensityParams,
) -> Result<SamplingMask> {
    log2_exact(n)?;
    if !(dim == 1 || dim == 2) {
        return Err(Error::InvalidParameter(format!(
            "dimension {dim} is not 1 or 2"
        )));
    }
    let size = n.pow(dim as u32);
    if m > size {
        return Err(Error::InvalidParameter(format!(
            "m = {m} exceeds {size} samples"
        )));
    }
    let floor = params.floor.min(n);
    let coords = |i: usize| if dim == 1 { (i, 0) } else { (i / n, i % n) };
    let in_floor = |i: usize| {
        let (a, b) = coords(i);
        a.max(b) < floor
    };
    let floor_count = floor.pow(dim as u32);
    if m < floor_count {
        return Err(Error::InvalidParameter(format!(
            "m = {m} is below the {floor_count} fully sampled indices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Efraimidis-Spirakis: keep the largest ln(u) / w.
    let mut keyed: Vec<(f64, usize)> = Vec::with_capacity(size - floor_count);
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for i in 0..size {
        let u: f64 = 1.0 - rng.gen::<f64>();
        if in_floor(i) {
            chosen.push(i);
            continue;
        }
        let (a, b) = coords(i);
        let w = (-params.decay * band(a.max(b)) as f64).exp2();
        keyed.push((u.ln() / w, i));
    }
    let extra = m - floor_count;
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    chosen.extend(keyed.iter().take(extra).map(|k| k.1));
    SamplingMask::new(chosen, size)
}

/// Samples of every `phi_{j,m}` at `x = p / 2^r`, `p < 2^r`.
#[derive(Debug, Clone)]
pub struct BasisSamples {
    pub resolution: u32,
    pub m: usize,
    /// `2^r x M`, row-major.
    values: Vec<f64>,
}

impl BasisSamples {
    pub fn new(spec: &WaveletSpec, j: u32, resolution: u32) -> Result<Self> {
        spec.check_level(j)?;
        if resolution < j || resolution > 24 {
            return Err(Error::InvalidParameter(format!(
                "evaluation resolution {resolution} must lie in {j}..=24"
            )));
        }
        let rel = resolution - j;
        let len = 1i64 << resolution;
        let m_total = 1usize << j;
        let nu = spec.nu;
        let step = 1i64 << rel;
        let scale = (j as f64 / 2.0).exp2();
        let interior = cascade(spec, Which::Interior, rel)?;
        let edges = if spec.boundary == Boundary::Vmp {
            Some(edge_cascades(spec, rel)?)
        } else {
            None
        };
        let mut values = vec![0.0; len as usize * m_total];
        let mut fill = |m: usize, f: &ScalingSamples, offset: i64, wrap: bool| {
            for p in 0..len {
                let shifts: &[i64] = if wrap { &[-1, 0, 1] } else { &[0] };
                let v: f64 = shifts.iter().map(|k| f.at(p - offset + k * len)).sum();
                values[p as usize * m_total + m] = scale * v;
            }
        };
        for m in 0..m_total {
            match &edges {
                Some((left, _)) if m < nu => fill(m, &left[m], 0, false),
                Some((_, right)) if m >= m_total - nu => {
                    fill(m, &right[m_total - 1 - m], len, false)
                }
                Some(_) => fill(m, &interior, m as i64 * step, false),
                None => fill(m, &interior, m as i64 * step, true),
            }
        }
        Ok(BasisSamples {
            resolution,
            m: m_total,
            values,
        })
    }

    pub fn len(&self) -> usize {
        1 << self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.values[p * self.m..(p + 1) * self.m]
    }

    /// `sum_m c_m phi_{j,m}` on the grid.
    pub fn synthesize_1d(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: c.len(),
            });
        }
        Ok((0..self.len()).map(|p| dot(self.row(p), c)).collect())
    }

    /// `sum c_{a,b} phi_{j,a}(x) phi_{j,b}(y)` on the grid, row index `x`.
    pub fn synthesize_2d(&self, c: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        if c.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                got: c.len(),
            });
        }
        let len = self.len();
        // t = V C, then out = t V^T.
        let t: Vec<f64> = (0..len)
            .flat_map(|p| {
                let row = self.row(p);
                (0..m).map(move |b| (0..m).map(|a| row[a] * c[a * m + b]).sum::<f64>())
            })
            .collect();
        let mut out = vec![0.0; len * len];
        for p in 0..len {
            let tp = &t[p * m..(p + 1) * m];
            for s in 0..len {
                out[p * len + s] = dot(tp, self.row(s));
            }
        }
        Ok(out)
    }
}

/// `sum_n c_n w_n` at `x = p / 2^r` from the first `K` Walsh coefficients
/// per axis.
pub fn walsh_synthesize(c: &[f64], dim: usize, resolution: u32) -> Result<Vec<f64>> {
    let len = 1usize << resolution;
    let k = match dim {
        1 => c.len(),
        2 => (c.len() as f64).sqrt().round() as usize,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} is not 1 or 2"
            )))
        }
    };
    log2_exact(k)?;
    if k > len {
        return Err(Error::InvalidParameter(format!(
            "{k} Walsh coefficients need a grid of at least {k} points"
        )));
    }
    if dim == 1 {
        let mut v = c.to_vec();
        v.resize(len, 0.0);
        fwht_sequency(&mut v)?;
        return Ok(v);
    }
    if k * k != c.len() {
        return Err(Error::DimensionMismatch {
            expected: k * k,
            got: c.len(),
        });
    }
    let mut rows = vec![0.0; k * len];
    for r in 0..k {
        let mut v = c[r * k..(r + 1) * k].to_vec();
        v.resize(len, 0.0);
        fwht_sequency(&mut v)?;
        rows[r * len..(r + 1) * len].copy_from_slice(&v);
    }
    let mut out = vec![0.0; len * len];
    for col in 0..len {
        let mut v: Vec<f64> = (0..k).map(|r| rows[r * len + col]).collect();
        v.resize(len, 0.0);
        fwht_sequency(&mut v)?;
        for (p, x) in v.into_iter().enumerate() {
            out[p * len + col] = x;
        }
    }
    Ok(out)
}

/// Values of a test function at `x = p / 2^r`.
pub fn sample_on_grid(f: &TestFunction, resolution: u32) -> Vec<f64> {
    let len = 1usize << resolution;
    let h = 1.0 / len as f64;
    match f {
        TestFunction::OneD(g) => (0..len).map(|p| g(p as f64 * h)).collect(),
        TestFunction::TwoD(g) => (0..len * len)
            .map(|i| g((i / len) as f64 * h, (i % len) as f64 * h))
            .collect(),
    }
}

/// `|a - b| / |a|` in the discrete l2 norm.
pub fn relative_l2_error(reference: &[f64], approx: &[f64]) -> f64 {
    let diff: f64 = reference
        .iter()
        .zip(approx)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    (diff / dot(reference, reference)).sqrt()
}

pub fn write_vector_csv(out: &mut impl Write, values: &[f64]) -> std::io::Result<()> {
    writeln!(out, "index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:e}")?;
    }
    Ok(())
}

pub fn write_matrix_csv(out: &mut impl Write, values: &[f64], cols: usize) -> std::io::Result<()> {
    let header: Vec<String> = (0..cols).map(|c| format!("c{c}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in values.chunks(cols) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads either CSV layout; returns the values and the number of columns
/// (1 for `index,value` files).
pub fn read_csv(input: impl BufRead) -> Result<(Vec<f64>, usize)> {
    let bad = |line: usize, msg: &str| Error::Corrupt(format!("CSV line {line}: {msg}"));
    let mut lines = input.lines().enumerate().filter(|(_, l)| {
        l.as_ref()
            .map_or(true, |s| !s.starts_with('#') && !s.trim().is_empty())
    });
    let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    let header = header.map_err(|e| bad(1, &e.to_string()))?;
    let parse = |i: usize, s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(i + 1, "not a number"))
    };
    let mut values = Vec::new();
    if header.trim() == "index,value" {
        for (i, line) in lines {
            let line = line.map_err(|e| bad(i + 1, &e.to_string()))?;
            let (idx, v) = line
                .split_once(',')
                .ok_or_else(|| bad(i + 1, "expected index,value"))?;
            if idx.trim().parse::<usize>().ok() != Some(values.len()) {
                return Err(bad(i + 1, "indices must run 0, 1, 2, ..."));
            }
            values.push(parse(i, v)?);
        }
        return Ok((values, 1));
    }
    let cols = header.split(',').count();
    for (i, line) in lines {
        let line = line.map_err(|e| bad(i + 1, &e.to_string()))?;
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != cols {
            return Err(bad(i + 1, "ragged row"));
        }
        for cell in row {
            values.push(parse(i, cell)?);
        }
    }
    Ok((values, cols))
}

pub fn write_mask(out: &mut impl Write, mask: &SamplingMask) -> std::io::Result<()> {
    for i in mask.indices() {
        writeln!(out, "{i}")?;
    }
    Ok(())
}

pub fn read_mask(input: impl BufRead, size: usize) -> Result<SamplingMask> {
    let mut idx = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Corrupt(format!("mask line {}: {e}", i + 1)))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        idx.push(
            t.parse::<usize>()
                .map_err(|_| Error::Corrupt(format!("mask line {}: not an index", i + 1)))?,
        );
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Corrupt(
            "mask indices must be strictly increasing".into(),
        ));
    }
    SamplingMask::new(idx, size)
}
