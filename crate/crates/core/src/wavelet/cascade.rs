use super::filters::{load_filters, EdgeFilters};
use super::{tap, Boundary, WaveletSpec};
use crate::error::{Error, Result};
use crate::linalg;

/// Default dyadic resolution for kernel quadrature.
pub const DEFAULT_RESOLUTION: u32 = 14;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Interior,
    Left(usize),
    Right(usize),
}

/// A function sampled at `x = (support_offset + i) / 2^resolution`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSamples {
    pub values: Vec<f64>,
    pub resolution: u32,
    pub support_offset: i64,
}

impl ScalingSamples {
    /// Value at grid numerator `p` (i.e. at `p / 2^resolution`), zero off the support.
    #[inline]
    pub fn at(&self, p: i64) -> f64 {
        let i = p - self.support_offset;
        if i < 0 || i >= self.values.len() as i64 {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    /// Grid numerator range `[first, last]` of the support.
    pub fn support(&self) -> (i64, i64) {
        (
            self.support_offset,
            self.support_offset + self.values.len() as i64 - 1,
        )
    }

    /// Samples at a coarser resolution, taken from every `2^(R - r)`-th point.
    pub fn downsample(&self, r: u32) -> ScalingSamples {
        assert!(r <= self.resolution);
        let step = 1usize << (self.resolution - r);
        ScalingSamples {
            values: self.values.iter().step_by(step).copied().collect(),
            resolution: r,
            support_offset: self.support_offset >> (self.resolution - r),
        }
    }

    /// Composite trapezoid rule of the samples over `[a, b]` in grid numerators.
    pub fn trapezoid(&self, a: i64, b: i64) -> f64 {
        let (lo, hi) = self.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            return 0.0;
        }
        let mut s = 0.5 * (self.at(a) + self.at(b));
        for p in a + 1..b {
            s += self.at(p);
        }
        s / (1u64 << self.resolution) as f64
    }
}

fn lstsq(rows: &[Vec<f64>], rhs: &[f64], what: &str) -> Result<Vec<f64>> {
    let sol = linalg::lstsq(rows, rhs, 1e-13)?;
    let resid = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| (r.iter().zip(&sol).map(|(x, y)| x * y).sum::<f64>() - b).abs())
        .fold(0.0, f64::max);
    if !resid.is_finite() || resid > 1e-9 {
        return Err(Error::Numerical(format!(
            "{what}: integer-grid initialization did not converge (residual {resid:e})"
        )));
    }
    Ok(sol)
}

/// Interior scaling function of the filter `h` on `[-nu + 1, nu]`.
pub(crate) fn interior_samples(h: &[f64], resolution: u32) -> Result<ScalingSamples> {
    let nu = (h.len() / 2) as i64;
    let lo = -nu + 1;
    let mut vals: Vec<f64> = if nu == 1 {
        vec![1.0, 0.0]
    } else {
        // Unknowns phi(n), n = lo+1 ..= nu-1; phi vanishes at both support ends.
        let inner: Vec<i64> = (lo + 1..nu).collect();
        let dim = inner.len();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for &n in &inner {
            let mut row = vec![0.0; dim];
            row[(n - lo - 1) as usize] -= 1.0;
            for k in -nu + 1..=nu {
                let t = 2 * n - k;
                if t > lo && t < nu {
                    row[(t - lo - 1) as usize] += SQRT2 * tap(h, k);
                }
            }
            rows.push(row);
            rhs.push(0.0);
        }
        rows.push(vec![1.0; dim]);
        rhs.push(1.0);
        let sol = lstsq(&rows, &rhs, "interior cascade")?;
        let mut v = vec![0.0];
        v.extend(sol);
        v.push(0.0);
        v
    };
    for r in 1..=resolution {
        let half = 1i64 << (r - 1);
        let len = ((2 * nu - 1) << r) as usize + 1;
        let prev = vals;
        let mut next = vec![0.0; len];
        for (i, out) in next.iter_mut().enumerate() {
            if i % 2 == 0 {
                *out = prev[i / 2];
                continue;
            }
            let p = i as i64 + (lo << r);
            let mut s = 0.0;
            for k in -nu + 1..=nu {
                let idx = p - k * half - lo * half;
                if idx >= 0 && (idx as usize) < prev.len() {
                    s += tap(h, k) * prev[idx as usize];
                }
            }
            *out = SQRT2 * s;
        }
        vals = next;
    }
    Ok(ScalingSamples {
        values: vals,
        resolution,
        support_offset: lo << resolution,
    })
}

/// Left edge functions of `edge` (built for the filter whose interior
/// scaling function is `interior`), each on `[0, nu + m]`.
pub(crate) fn edge_samples(
    edge: &EdgeFilters,
    interior: &ScalingSamples,
    nu: usize,
    resolution: u32,
) -> Result<Vec<ScalingSamples>> {
    let big_r = interior.resolution;
    assert!(resolution <= big_r);
    let n = nu as i64;
    // Interior value at numerator q of resolution r.
    let phi_at = |q: i64, r: u32| interior.at(q << (big_r - r));
    let a = |m: usize, k: usize| edge.phi.get(m, k);
    let b = |m: usize, t: usize| edge.phi.get_or_zero(m, t);
    let bcols = edge.phi.cols;

    // Integer-grid values: unknowns phi^left_k(x) for x = 0 ..= nu + k.
    let offsets: Vec<usize> = (0..nu)
        .scan(0usize, |acc, k| {
            let o = *acc;
            *acc += nu + k + 1;
            Some(o)
        })
        .collect();
    let dim = offsets[nu - 1] + 2 * nu;
    let var = |k: usize, x: i64| -> Option<usize> {
        if x < 0 || x > n + k as i64 {
            None
        } else {
            Some(offsets[k] + x as usize)
        }
    };
    let system: Vec<Vec<f64>> = (0..nu)
        .map(|m| {
            (0..nu)
                .map(|k| f64::from(u8::from(m == k)) - a(m, k) / SQRT2)
                .collect()
        })
        .collect();
    let bsum: Vec<f64> = (0..nu)
        .map(|m| (nu..bcols).map(|t| b(m, t)).sum::<f64>() / SQRT2)
        .collect();
    let moments = linalg::solve(&system, &bsum)?;

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for m in 0..nu {
        for x in 0..=n + m as i64 {
            let mut row = vec![0.0; dim];
            row[var(m, x).expect("in range")] += 1.0;
            for k in 0..nu {
                if let Some(v) = var(k, 2 * x) {
                    row[v] -= SQRT2 * a(m, k);
                }
            }
            let known: f64 = (nu..bcols)
                .map(|t| b(m, t) * phi_at(2 * x - t as i64, 0))
                .sum();
            rows.push(row);
            rhs.push(SQRT2 * known);
        }
    }
    for x in 0..2 * n {
        let mut row = vec![0.0; dim];
        for m in 0..nu {
            if let Some(v) = var(m, x) {
                row[v] += moments[m];
            }
        }
        let tail: f64 = (n..x + n).map(|t| phi_at(x - t, 0)).sum();
        rows.push(row);
        rhs.push(1.0 - tail);
    }
    let sol = lstsq(&rows, &rhs, "edge cascade")?;
    let mut levels: Vec<Vec<f64>> = (0..nu)
        .map(|k| sol[offsets[k]..offsets[k] + nu + k + 1].to_vec())
        .collect();

    for r in 1..=resolution {
        let next: Vec<Vec<f64>> = (0..nu)
            .map(|m| {
                let len = ((nu + m) << r) + 1;
                (0..len)
                    .map(|i| {
                        if i % 2 == 0 {
                            return levels[m][i / 2];
                        }
                        let p = i as i64;
                        let mut s = 0.0;
                        for (k, lk) in levels.iter().enumerate() {
                            if let Some(&v) = lk.get(i) {
                                s += a(m, k) * v;
                            }
                        }
                        for t in nu..bcols {
                            s += b(m, t) * phi_at(p - ((t as i64) << (r - 1)), r - 1);
                        }
                        SQRT2 * s
                    })
                    .collect()
            })
            .collect();
        levels = next;
    }
    Ok(levels
        .into_iter()
        .map(|values| ScalingSamples {
            values,
            resolution,
            support_offset: 0,
        })
        .collect())
}

fn reflect(s: &ScalingSamples) -> ScalingSamples {
    let mut values = s.values.clone();
    values.reverse();
    ScalingSamples {
        values,
        resolution: s.resolution,
        support_offset: -(s.support().1),
    }
}

/// All boundary functions of a boundary-corrected spec: `(left, right)`.
/// Right functions live on `[-nu - m, 0]`.
pub fn edge_cascades(
    spec: &WaveletSpec,
    resolution: u32,
) -> Result<(Vec<ScalingSamples>, Vec<ScalingSamples>)> {
    if spec.boundary != Boundary::Vmp {
        return Err(Error::Unsupported(format!(
            "{spec} has no boundary functions"
        )));
    }
    let set = load_filters(spec)?;
    let interior = interior_samples(&set.h, resolution)?;
    let left = edge_samples(set.left()?, &interior, spec.nu, resolution)?;
    // The reflected filter's scaling function is phi(1 - x).
    let mut rvals = interior.values.clone();
    rvals.reverse();
    let reflected = ScalingSamples {
        values: rvals,
        ..interior
    };
    let right = edge_samples(set.right()?, &reflected, spec.nu, resolution)?
        .iter()
        .map(reflect)
        .collect();
    Ok((left, right))
}

/// Samples of the interior or a boundary scaling function at spacing `2^-R`.
pub fn cascade(spec: &WaveletSpec, which: Which, resolution: u32) -> Result<ScalingSamples> {
    spec.validate()?;
    match which {
        Which::Interior => interior_samples(spec.taps(), resolution),
        Which::Left(m) | Which::Right(m) => {
            if m >= spec.nu {
                return Err(Error::InvalidParameter(format!(
                    "boundary index {m} out of range for nu = {}",
                    spec.nu
                )));
            }
            let (left, right) = edge_cascades(spec, resolution)?;
            Ok(match which {
                Which::Left(_) => left[m].clone(),
                _ => right[m].clone(),
            })
        }
    }
}
