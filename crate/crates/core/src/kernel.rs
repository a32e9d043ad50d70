//! Walsh transforms of the scaling functions restricted to unit cells.
//!
//! For a function `f` supported on a few unit cells, the kernel of cell `l` is
//! `kappa_l(s) = int_0^1 f(x + l) w_s(x) dx` for `s < 2^q`. Interior kernels
//! use the interior scaling function; boundary-corrected specs also get one
//! kernel block per edge function and side.
//!
//! Cache layout (little endian): magic `CWWK`, `u32` version, `u32` family
//! tag, `u32` nu, `u32` boundary tag, `u32` q, `u32` R, then `u32` row counts
//! of the interior, left and right blocks, the `f64` payload (each row holds
//! `2^q` values) and a trailing CRC32 of everything before it.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::walsh::fwht_sequency;
use crate::wavelet::{
    cascade, edge_cascades, Boundary, Family, ScalingSamples, WaveletSpec, Which,
};

pub const KERNEL_MAGIC: &[u8; 4] = b"CWWK";
pub const KERNEL_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 * 9;

/// Kernel rows for cells `first_cell ..` of one function, each of length `2^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBlock {
    pub first_cell: i64,
    pub rows: Vec<Vec<f64>>,
}

impl KernelBlock {
    pub fn cells(&self) -> std::ops::Range<i64> {
        self.first_cell..self.first_cell + self.rows.len() as i64
    }

    /// `kappa_l(s)`, zero for cells outside the block.
    #[inline]
    pub fn get(&self, l: i64, s: usize) -> f64 {
        let i = l - self.first_cell;
        if i < 0 || i >= self.rows.len() as i64 {
            0.0
        } else {
            self.rows[i as usize][s]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub spec: WaveletSpec,
    pub q: u32,
    pub resolution: u32,
    /// Cells `l = -nu + 1 ..= nu - 1` of the interior scaling function.
    pub interior: KernelBlock,
    /// Left edge function `m` on cells `0 ..= nu - 1 + m` (boundary-corrected only).
    pub left: Vec<KernelBlock>,
    /// Right edge function `m` on cells `-nu - m ..= -1`, counted from the
    /// right endpoint (boundary-corrected only).
    pub right: Vec<KernelBlock>,
}

/// Per-cell integrals of `f` over the `2^q` equal subcells of `[l, l + 1)`,
/// composite trapezoid on the sample grid.
fn cell_masses(f: &ScalingSamples, l: i64, q: u32) -> Vec<f64> {
    let r = f.resolution;
    let width = 1i64 << (r - q);
    let base = l << r;
    (0..1i64 << q)
        .map(|t| f.trapezoid(base + t * width, base + (t + 1) * width))
        .collect()
}

fn block_from(
    f: &ScalingSamples,
    cells: std::ops::RangeInclusive<i64>,
    q: u32,
) -> Result<KernelBlock> {
    let first_cell = *cells.start();
    let rows = cells
        .map(|l| {
            let mut v = cell_masses(f, l, q);
            fwht_sequency(&mut v)?;
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelBlock { first_cell, rows })
}

fn check_q(q: u32, resolution: u32) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidParameter("q must be at least 1".into()));
    }
    if resolution < q {
        return Err(Error::InvalidParameter(format!(
            "quadrature resolution {resolution} is below q = {q}"
        )));
    }
    Ok(())
}

/// Interior kernels `kappa_l(s)` for `l = -nu + 1 ..= nu - 1`, `s < 2^q`.
pub fn compute_interior_kernels(
    spec: &WaveletSpec,
    q: u32,
    resolution: u32,
) -> Result<KernelBlock> {
    check_q(q, resolution)?;
    if spec.nu == 1 {
        // The indicator of [0, 1): exact masses, no quadrature of the jump.
        let mut row = vec![0.0; 1 << q];
        row[0] = 1.0;
        return Ok(KernelBlock {
            first_cell: 0,
            rows: vec![row],
        });
    }
    let phi = cascade(spec, Which::Interior, resolution)?;
    let nu = spec.nu as i64;
    block_from(&phi, -nu + 1..=nu - 1, q)
}

/// Left and right edge kernels.
///
/// Boundary-corrected: quadratures of the edge functions. Periodic: the
/// wrapped interior kernels, i.e. edge column `m` (left) or `M - 1 - m`
/// (right) uses every interior cell, so each block is a copy of the interior
/// block.
pub fn compute_edge_kernels(
    spec: &WaveletSpec,
    q: u32,
    resolution: u32,
) -> Result<(Vec<KernelBlock>, Vec<KernelBlock>)> {
    check_q(q, resolution)?;
    if spec.nu < 2 {
        return Err(Error::Unsupported("edge kernels need nu >= 2".into()));
    }
    let nu = spec.nu as i64;
    match spec.boundary {
        Boundary::Periodic => {
            let interior = compute_interior_kernels(spec, q, resolution)?;
            Ok((vec![interior.clone(); spec.nu], vec![interior; spec.nu]))
        }
        Boundary::Vmp => {
            let (left, right) = edge_cascades(spec, resolution)?;
            let l = left
                .iter()
                .enumerate()
                .map(|(m, f)| block_from(f, 0..=nu - 1 + m as i64, q))
                .collect::<Result<Vec<_>>>()?;
            let r = right
                .iter()
                .enumerate()
                .map(|(m, f)| block_from(f, -nu - m as i64..=-1, q))
                .collect::<Result<Vec<_>>>()?;
            Ok((l, r))
        }
    }
}

fn family_tag(f: Family) -> u32 {
    match f {
        Family::Daubechies => 0,
        Family::Symlet => 1,
    }
}

fn boundary_tag(b: Boundary) -> u32 {
    match b {
        Boundary::Periodic => 0,
        Boundary::Vmp => 1,
    }
}

impl KernelTable {
    pub fn compute(spec: &WaveletSpec, q: u32, resolution: u32) -> Result<Self> {
        spec.validate()?;
        let interior = compute_interior_kernels(spec, q, resolution)?;
        let (left, right) = if spec.boundary == Boundary::Vmp {
            compute_edge_kernels(spec, q, resolution)?
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(KernelTable {
            spec: *spec,
            q,
            resolution,
            interior,
            left,
            right,
        })
    }

    /// Number of kernel entries per cell, `2^q`.
    pub fn width(&self) -> usize {
        1 << self.q
    }

    /// Per-cell masses `int f` over the `2^q` subcells, recovered from the
    /// kernels by the inverse transform.
    pub fn masses(block: &KernelBlock, q: u32) -> Vec<Vec<f64>> {
        let scale = 1.0 / (1u64 << q) as f64;
        block
            .rows
            .iter()
            .map(|row| {
                let mut v = row.clone();
                fwht_sequency(&mut v).expect("power-of-two row");
                v.iter_mut().for_each(|x| *x *= scale);
                v
            })
            .collect()
    }

    /// Kernel table truncated to a smaller `q`. The first `2^q'` Walsh
    /// coefficients are the same integrals at any larger `q`.
    pub fn truncated(&self, q: u32) -> Result<Self> {
        if q == 0 || q > self.q {
            return Err(Error::InvalidParameter(format!(
                "cannot truncate a q = {} table to q = {q}",
                self.q
            )));
        }
        let cut = |b: &KernelBlock| KernelBlock {
            first_cell: b.first_cell,
            rows: b.rows.iter().map(|r| r[..1 << q].to_vec()).collect(),
        };
        Ok(KernelTable {
            spec: self.spec,
            q,
            resolution: self.resolution,
            interior: cut(&self.interior),
            left: self.left.iter().map(cut).collect(),
            right: self.right.iter().map(cut).collect(),
        })
    }

    fn expected_rows(spec: &WaveletSpec) -> (usize, usize, usize) {
        let nu = spec.nu;
        let edge = if spec.boundary == Boundary::Vmp {
            (0..nu).map(|m| nu + m).sum()
        } else {
            0
        };
        (2 * nu - 1, edge, edge)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(KERNEL_MAGIC);
        let rows = |bs: &[KernelBlock]| bs.iter().map(|b| b.rows.len()).sum::<usize>() as u32;
        for v in [
            KERNEL_VERSION,
            family_tag(self.spec.family),
            self.spec.nu as u32,
            boundary_tag(self.spec.boundary),
            self.q,
            self.resolution,
            self.interior.rows.len() as u32,
            rows(&self.left),
            rows(&self.right),
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let blocks = std::iter::once(&self.interior)
            .chain(&self.left)
            .chain(&self.right);
        for b in blocks {
            for row in &b.rows {
                for x in row {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    /// Parses a cache file image. `origin` names the source in errors.
    pub fn decode(bytes: &[u8], origin: &Path) -> Result<Self> {
        if bytes.len() < HEADER_LEN + 4 {
            return Err(Error::Checksum(origin.to_path_buf()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        if crc32fast::hash(body) != stored {
            return Err(Error::Checksum(origin.to_path_buf()));
        }
        if &body[..4] != KERNEL_MAGIC {
            return Err(Error::Corrupt(format!(
                "{} is not a kernel cache",
                origin.display()
            )));
        }
        let word =
            |i: usize| u32::from_le_bytes(body[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes"));
        let version = word(0);
        if version != KERNEL_VERSION {
            return Err(Error::Version {
                found: version,
                expected: KERNEL_VERSION,
            });
        }
        let family = match word(1) {
            0 => Family::Daubechies,
            1 => Family::Symlet,
            t => return Err(Error::Corrupt(format!("unknown family tag {t}"))),
        };
        let boundary = match word(3) {
            0 => Boundary::Periodic,
            1 => Boundary::Vmp,
            t => return Err(Error::Corrupt(format!("unknown boundary tag {t}"))),
        };
        let spec = WaveletSpec::new(family, word(2) as usize, boundary)?;
        let (q, resolution) = (word(4), word(5));
        if q == 0 || q > 30 || resolution < q {
            return Err(Error::Corrupt(format!("bad q = {q} or R = {resolution}")));
        }
        let counts = (word(6) as usize, word(7) as usize, word(8) as usize);
        if counts != Self::expected_rows(&spec) {
            return Err(Error::Corrupt(format!(
                "block shape {counts:?} does not match {spec}"
            )));
        }
        let width = 1usize << q;
        let total = counts.0 + counts.1 + counts.2;
        let payload = &body[HEADER_LEN..];
        if payload.len() != total * width * 8 {
            return Err(Error::Corrupt(format!(
                "payload holds {} bytes, expected {}",
                payload.len(),
                total * width * 8
            )));
        }
        let mut rows = payload.chunks_exact(width * 8).map(|c| {
            c.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect::<Vec<f64>>()
        });
        let nu = spec.nu as i64;
        let mut take = |first_cell: i64, n: usize| KernelBlock {
            first_cell,
            rows: rows.by_ref().take(n).collect(),
        };
        let interior = take(-nu + 1, counts.0);
        let (mut left, mut right) = (Vec::new(), Vec::new());
        if boundary == Boundary::Vmp {
            for m in 0..nu {
                left.push(take(0, (nu + m) as usize));
            }
            for m in 0..nu {
                right.push(take(-nu - m, (nu + m) as usize));
            }
        }
        Ok(KernelTable {
            spec,
            q,
            resolution,
            interior,
            left,
            right,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes, path)
    }

    /// Loads a table and checks that it was built for `spec`, `q` and `resolution`.
    pub fn load_expect(path: &Path, spec: &WaveletSpec, q: u32, resolution: u32) -> Result<Self> {
        let t = Self::load(path)?;
        if t.spec != *spec || t.q != q || t.resolution != resolution {
            return Err(Error::HeaderMismatch(format!(
                "{} holds {} q={} R={}, wanted {} q={q} R={resolution}",
                path.display(),
                t.spec,
                t.q,
                t.resolution,
                spec
            )));
        }
        Ok(t)
    }
}

/// File name of the cache entry for a configuration, e.g. `db4-vmp-q2-r14.cwwk`.
pub fn cache_file_name(spec: &WaveletSpec, q: u32, resolution: u32) -> String {
    format!("{}-{}-q{q}-r{resolution}.cwwk", spec.name(), spec.boundary)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheStatus {
    /// A valid cache file was found and loaded.
    Cached,
    /// No cache file existed; the table was computed and written.
    Computed,
    /// The cache file was unreadable or stale and has been rewritten.
    Recomputed(String),
}

/// Loads the cached table from `dir` or computes and stores it.
pub fn load_or_compute(
    dir: &Path,
    spec: &WaveletSpec,
    q: u32,
    resolution: u32,
) -> Result<(KernelTable, CacheStatus, PathBuf)> {
    let path = dir.join(cache_file_name(spec, q, resolution));
    let status = if path.exists() {
        match KernelTable::load_expect(&path, spec, q, resolution) {
            Ok(t) => return Ok((t, CacheStatus::Cached, path)),
            Err(e @ Error::Io { .. }) => return Err(e),
            Err(e) => CacheStatus::Recomputed(e.to_string()),
        }
    } else {
        CacheStatus::Computed
    };
    let table = KernelTable::compute(spec, q, resolution)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    table.save(&path)?;
    Ok((table, status, path))
}
