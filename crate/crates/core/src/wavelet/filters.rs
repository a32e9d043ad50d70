//! Shipped filter data and its binary file format.
//!
//! Layout (little endian): magic `CWWF`, `u32` version, `u32` family tag
//! (0 = Daubechies, 1 = Symlet), `u32` nu, `u32` matrix count, then for each
//! matrix `u32` rows, `u32` cols and `rows * cols` `f64` values in row-major
//! order. Matrices in order: interior taps (1 x 2nu); for nu >= 2 the left
//! edge `coef`, `phi`, `psi` and the right edge `coef`, `phi`, `psi`.

use std::io::Read;
use std::path::Path;

use super::{Family, WaveletSpec};
use crate::error::{Error, Result};

pub const FILTER_MAGIC: &[u8; 4] = b"CWWF";
pub const FILTER_VERSION: u32 = 1;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Entry or zero when outside the stored columns.
    #[inline]
    pub fn get_or_zero(&self, i: usize, j: usize) -> f64 {
        if j < self.cols {
            self.data[i * self.cols + j]
        } else {
            0.0
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Edge data for one side, expressed as if it were the left edge.
///
/// * `coef`: `nu x (2nu - 1)`, edge function `m` as a combination of the
///   restricted translates `phi(. - t)|[0,inf)`, `t = -nu + 1 ..= nu - 1`.
/// * `phi`: two-scale rows of the edge scaling functions in fine coordinates
///   (index `i < nu` is the fine edge function `i`, index `i >= nu` the fine
///   interior translate `i`).
/// * `psi`: the edge wavelets in the same fine coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFilters {
    pub coef: Matrix,
    pub phi: Matrix,
    pub psi: Matrix,
}

/// Interior filter plus both edge filter sets. The right edge is stored in
/// reflected coordinates: it is the left edge of the reversed filter, and
/// `phi^right_m(x) = phi~^left_m(-x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFilterSet {
    pub family: Family,
    pub nu: usize,
    pub h: Vec<f64>,
    pub left: Option<EdgeFilters>,
    pub right: Option<EdgeFilters>,
}

impl BoundaryFilterSet {
    pub fn highpass(&self) -> Vec<f64> {
        super::highpass(&self.h)
    }

    pub fn reflected_taps(&self) -> Vec<f64> {
        self.h.iter().rev().copied().collect()
    }

    pub fn left(&self) -> Result<&EdgeFilters> {
        self.left
            .as_ref()
            .ok_or_else(|| Error::Unsupported("no boundary filters for this order".into()))
    }

    pub fn right(&self) -> Result<&EdgeFilters> {
        self.right
            .as_ref()
            .ok_or_else(|| Error::Unsupported("no boundary filters for this order".into()))
    }
}

fn family_tag(f: Family) -> u32 {
    match f {
        Family::Daubechies => 0,
        Family::Symlet => 1,
    }
}

pub fn encode_filter_set(set: &BoundaryFilterSet) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(FILTER_MAGIC);
    out.extend_from_slice(&FILTER_VERSION.to_le_bytes());
    out.extend_from_slice(&family_tag(set.family).to_le_bytes());
    out.extend_from_slice(&(set.nu as u32).to_le_bytes());
    let taps = Matrix {
        rows: 1,
        cols: set.h.len(),
        data: set.h.clone(),
    };
    let mut mats = vec![&taps];
    for e in [&set.left, &set.right].into_iter().flatten() {
        mats.extend([&e.coef, &e.phi, &e.psi]);
    }
    out.extend_from_slice(&(mats.len() as u32).to_le_bytes());
    for m in mats {
        out.extend_from_slice(&(m.rows as u32).to_le_bytes());
        out.extend_from_slice(&(m.cols as u32).to_le_bytes());
        for x in &m.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Corrupt("filter data truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        if rows * cols > 1 << 16 {
            return Err(Error::Corrupt(format!(
                "implausible matrix size {rows}x{cols}"
            )));
        }
        let data = (0..rows * cols)
            .map(|_| self.f64())
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix { rows, cols, data })
    }
}

pub fn decode_filter_set(buf: &[u8]) -> Result<BoundaryFilterSet> {
    let mut c = Cursor { buf, pos: 0 };
    if c.take(4)? != FILTER_MAGIC {
        return Err(Error::Corrupt("bad filter file magic".into()));
    }
    let version = c.u32()?;
    if version != FILTER_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FILTER_VERSION,
        });
    }
    let family = match c.u32()? {
        0 => Family::Daubechies,
        1 => Family::Symlet,
        t => return Err(Error::Corrupt(format!("unknown family tag {t}"))),
    };
    let nu = c.u32()? as usize;
    let count = c.u32()? as usize;
    let expected = if nu >= 2 { 7 } else { 1 };
    if count != expected {
        return Err(Error::Corrupt(format!(
            "expected {expected} matrices, found {count}"
        )));
    }
    let taps = c.matrix()?;
    if taps.rows != 1 || taps.cols != 2 * nu {
        return Err(Error::Corrupt(
            "interior filter has the wrong length".into(),
        ));
    }
    let mut edges = Vec::new();
    for _ in 0..(count - 1) / 3 {
        let coef = c.matrix()?;
        let phi = c.matrix()?;
        let psi = c.matrix()?;
        if coef.rows != nu || coef.cols != 2 * nu - 1 || phi.rows != nu || psi.rows != nu {
            return Err(Error::Corrupt("edge matrices have the wrong shape".into()));
        }
        edges.push(EdgeFilters { coef, phi, psi });
    }
    if c.pos != buf.len() {
        return Err(Error::Corrupt("trailing bytes in filter data".into()));
    }
    let mut edges = edges.into_iter();
    Ok(BoundaryFilterSet {
        family,
        nu,
        h: taps.data,
        left: edges.next(),
        right: edges.next(),
    })
}

pub fn write_filter_file(set: &BoundaryFilterSet, path: &Path) -> Result<()> {
    std::fs::write(path, encode_filter_set(set)).map_err(|e| Error::io(path, e))
}

pub fn read_filter_file(path: &Path) -> Result<BoundaryFilterSet> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    decode_filter_set(&buf)
}

/// File name of the shipped data for a family and order, e.g. `db4.cwwf`.
pub fn data_file_name(family: Family, nu: usize) -> String {
    let prefix = match family {
        Family::Daubechies => "db",
        Family::Symlet => "sym",
    };
    format!("{prefix}{nu}.cwwf")
}

macro_rules! shipped {
    ($($name:literal),* $(,)?) => {
        fn shipped_bytes(file: &str) -> Option<&'static [u8]> {
            match file {
                $($name => Some(include_bytes!(concat!("../../data/", $name))),)*
                _ => None,
            }
        }
    };
}

shipped!(
    "db1.cwwf",
    "db2.cwwf",
    "db3.cwwf",
    "db4.cwwf",
    "db5.cwwf",
    "db6.cwwf",
    "sym1.cwwf",
    "sym2.cwwf",
    "sym3.cwwf",
    "sym4.cwwf",
    "sym5.cwwf",
    "sym6.cwwf",
);

/// Loads the shipped filter data for `spec`.
pub fn load_filters(spec: &WaveletSpec) -> Result<BoundaryFilterSet> {
    spec.validate()?;
    let name = data_file_name(spec.family, spec.nu);
    let bytes = shipped_bytes(&name)
        .ok_or_else(|| Error::Unsupported(format!("no shipped filter data {name}")))?;
    let set = decode_filter_set(bytes)?;
    if set.family != spec.family || set.nu != spec.nu {
        return Err(Error::Corrupt(format!(
            "{name} holds data for another wavelet"
        )));
    }
    Ok(set)
}
