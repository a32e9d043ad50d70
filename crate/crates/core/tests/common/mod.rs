#![allow(dead_code)]

use std::collections::HashMap;

use cww::walsh::walsh_sign;
use cww::wavelet::construct::antiderivative_at_integers;
use cww::wavelet::{load_filters, Boundary, WaveletSpec};

/// Exact antiderivative `Phi(p / 2^r)` of the interior scaling function from
/// its integer values and the two-scale relation
/// `Phi(x) = 2^{-1/2} sum_k h_k Phi(2x - k)`.
pub struct Antiderivative {
    h: Vec<f64>,
    pub nu: i64,
    at_int: Vec<f64>,
    memo: HashMap<(u32, i64), f64>,
}

impl Antiderivative {
    pub fn new(spec: &WaveletSpec) -> Self {
        let h = spec.taps().to_vec();
        let at_int = antiderivative_at_integers(&h).unwrap();
        Antiderivative {
            nu: spec.nu as i64,
            h,
            at_int,
            memo: HashMap::new(),
        }
    }

    pub fn at(&mut self, p: i64, r: u32) -> f64 {
        let nu = self.nu;
        if p <= (-nu + 1) << r {
            return 0.0;
        }
        if p >= nu << r {
            return 1.0;
        }
        if r == 0 {
            return self.at_int[(p + nu - 1) as usize];
        }
        if p % 2 == 0 {
            return self.at(p / 2, r - 1);
        }
        if let Some(&v) = self.memo.get(&(r, p)) {
            return v;
        }
        let mut s = 0.0;
        for (i, hk) in self.h.clone().into_iter().enumerate() {
            let k = i as i64 - nu + 1;
            s += hk * self.at(p - (k << (r - 1)), r - 1);
        }
        let v = s / std::f64::consts::SQRT_2;
        self.memo.insert((r, p), v);
        v
    }

    /// `int phi` over `[a, b] / 2^r`.
    pub fn mass(&mut self, a: i64, b: i64, r: u32) -> f64 {
        self.at(b, r) - self.at(a, r)
    }
}

/// `kappa(s) = sum_t w_s(t / 2^q) mass(t)` with direct Walsh signs.
pub fn walsh_sum(masses: &[f64], q: u32, s: u64) -> f64 {
    masses
        .iter()
        .enumerate()
        .map(|(t, m)| walsh_sign(s, t as u64, q) * m)
        .sum()
}

/// Exact cell masses of a boundary function from its expansion in restricted
/// translates (left) or reflected translates (right).
pub fn edge_mass(
    big: &mut Antiderivative,
    coef: &[f64],
    right: bool,
    a: i64,
    b: i64,
    r: u32,
) -> f64 {
    let nu = big.nu;
    coef.iter()
        .enumerate()
        .map(|(i, c)| {
            let t = i as i64 - nu + 1;
            if right {
                // phi^R(x) = sum_t c_t phi(1 + x + t) for x <= 0.
                let off = (1 + t) << r;
                c * big.mass(a + off, b + off, r)
            } else {
                let off = t << r;
                c * big.mass(a - off, b - off, r)
            }
        })
        .sum()
}

/// Exact `<phi_{j,m}, w_n>` for `n < 2^{j+q}` as an `N x M` row-major
/// matrix, from cell masses on the `1 / N` grid and direct Walsh signs.
pub fn exact_matrix(spec: &WaveletSpec, j: u32, q: u32) -> Vec<Vec<f64>> {
    let mut big = Antiderivative::new(spec);
    let (m_total, n_total) = (1i64 << j, 1i64 << (j + q));
    let nu = spec.nu as i64;
    let scale = (-(j as f64) / 2.0).exp2();
    let filters = (spec.boundary == Boundary::Vmp).then(|| load_filters(spec).unwrap());
    let mut cols = Vec::new();
    for m in 0..m_total {
        let masses: Vec<f64> = (0..n_total)
            .map(|i| {
                let mass = match &filters {
                    Some(set) if m < nu => edge_mass(
                        &mut big,
                        set.left().unwrap().coef.row(m as usize),
                        false,
                        i,
                        i + 1,
                        q,
                    ),
                    Some(set) if m >= m_total - nu => {
                        let row = set.right().unwrap().coef.row((m_total - 1 - m) as usize);
                        edge_mass(&mut big, row, true, i - n_total, i - n_total + 1, q)
                    }
                    Some(_) => big.mass(i - (m << q), i - (m << q) + 1, q),
                    None => (-2..=2)
                        .map(|k| {
                            let a = i - (m << q) + k * n_total;
                            big.mass(a, a + 1, q)
                        })
                        .sum(),
                };
                scale * mass
            })
            .collect();
        cols.push(masses);
    }
    (0..n_total as u64)
        .map(|n| {
            cols.iter()
                .map(|masses| {
                    masses
                        .iter()
                        .enumerate()
                        .map(|(i, w)| walsh_sign(n, i as u64, j + q) * w)
                        .sum()
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn mat_t_vec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.first().map_or(0, Vec::len)];
    for (r, yi) in a.iter().zip(y) {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v * yi;
        }
    }
    out
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generalised-sampling error next to the quantities bounding it.
#[derive(Debug, Clone, Copy)]
pub struct QuasiOptimality {
    /// `|f - f~|` for the GS reconstruction.
    pub error: f64,
    /// `|f - P_{R_M} f|`.
    pub best: f64,
    pub mu: f64,
}

/// All norms and the coefficients `<f, phi_{j,m}>` by left-endpoint
/// quadrature on a `2^14` grid; samples by midpoint quadrature on `2^18`.
pub fn quasi_optimality(spec: &WaveletSpec, j: u32, q: u32, f: fn(f64) -> f64) -> QuasiOptimality {
    use cww::fastop::FastOp;
    use cww::functions::TestFunction;
    use cww::oracle::{build_dense, subspace_angle, DenseMethod};
    use cww::reconstruct::{acquire_samples, gs_solve, BasisSamples, CgParams};

    let r = 14;
    let h = (-(r as f64)).exp2();
    let y = acquire_samples(&TestFunction::OneD(f), 1 << (j + q), 18).unwrap();
    let op = FastOp::with_kernels(spec, j, q, 1).unwrap();
    let x = gs_solve(&op, &y.values, &CgParams::default()).unwrap().x;
    let basis = BasisSamples::new(spec, j, r).unwrap();
    let truth: Vec<f64> = (0..1usize << r).map(|p| f(p as f64 * h)).collect();
    let approx = basis.synthesize_1d(&x).unwrap();
    let mut coef = vec![0.0; 1 << j];
    for (p, t) in truth.iter().enumerate() {
        for (c, phi) in coef.iter_mut().zip(basis.row(p)) {
            *c += h * t * phi;
        }
    }
    let best = basis.synthesize_1d(&coef).unwrap();
    let dist = |a: &[f64]| {
        (h * truth
            .iter()
            .zip(a)
            .map(|(u, v)| (u - v).powi(2))
            .sum::<f64>())
        .sqrt()
    };
    let mu = subspace_angle(&build_dense(spec, j, q, DenseMethod::Lemma).unwrap())
        .unwrap()
        .mu;
    QuasiOptimality {
        error: dist(&approx),
        best: dist(&best),
        mu,
    }
}

/// Sequency-ordered Hadamard matrix of size `2^r`: Sylvester rows sorted by
/// their number of sign changes.
pub fn sequency_hadamard(r: u32) -> Vec<Vec<f64>> {
    let n = 1usize << r;
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    if (a & b).count_ones() % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect()
        })
        .collect();
    rows.sort_by_key(|row| sign_changes(row));
    rows
}

pub fn sign_changes(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Exhaustive checks of the Walsh identities for scales up to 6 and of the
/// FWHT against the dense matrix for lengths up to 64. Returns the failures.
pub fn walsh_identity_failures() -> Vec<String> {
    use cww::walsh::{dyadic_xor, fwht_sequency, walsh_eval, Dyadic};

    let d = |p: u64, j: u32| Dyadic::new(p, j).unwrap();
    let mut failures = Vec::new();
    for r in 0..=6u32 {
        let h = sequency_hadamard(r);
        let len = 1u64 << r;
        for n in 0..len {
            for p in 0..len {
                if walsh_eval(n, d(p, r)) as f64 != h[n as usize][p as usize] {
                    failures.push(format!("w_{n}({p}/2^{r}) differs from the Hadamard entry"));
                }
                // Symmetry.
                if walsh_eval(n, d(p, r)) != walsh_eval(p, d(n, r)) {
                    failures.push(format!("symmetry fails for n = {n}, l = {p}, j = {r}"));
                }
            }
            let row: Vec<f64> = (0..len).map(|p| walsh_eval(n, d(p, r)) as f64).collect();
            if sign_changes(&row) != n as usize {
                failures.push(format!(
                    "w_{n} at scale {r} has {} sign changes",
                    sign_changes(&row)
                ));
            }
        }
        // Multiplicativity for every n below 2^(r+2) and x, y at scale r.
        for n in 0..4 * len {
            for p in 0..len {
                for s in 0..len {
                    let lhs = walsh_eval(n, dyadic_xor(d(p, r), d(s, r)));
                    if lhs != walsh_eval(n, d(p, r)) * walsh_eval(n, d(s, r)) {
                        failures.push(format!(
                            "multiplicativity fails for n = {n}, x = {p}/2^{r}, y = {s}/2^{r}"
                        ));
                    }
                }
            }
        }
        // FWHT against the dense matrix on a deterministic vector.
        let v: Vec<f64> = (0..len).map(|k| ((k * 7 + 3) % 11) as f64 - 5.0).collect();
        let mut fast = v.clone();
        fwht_sequency(&mut fast).unwrap();
        for (n, row) in h.iter().enumerate() {
            let dense: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
            if (dense - fast[n]).abs() > 1e-12 {
                failures.push(format!(
                    "FWHT entry {n} of length {len} is {} not {dense}",
                    fast[n]
                ));
            }
        }
    }
    // Scale shift: w_n(x / 2^j) = w_{n >> j}(x).
    for j in 0..=4u32 {
        for s in 0..=6u32 {
            for p in 0..1u64 << s {
                for n in 0..256u64 {
                    if walsh_eval(n, d(p, s + j)) != walsh_eval(n >> j, d(p, s)) {
                        failures.push(format!(
                            "scale shift fails for n = {n}, x = {p}/2^{s}, j = {j}"
                        ));
                    }
                }
            }
        }
    }
    failures
}
