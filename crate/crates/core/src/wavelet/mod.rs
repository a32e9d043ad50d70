//! Scaling filters, boundary-corrected bases on `[0, 1]`, cascade evaluation
//! and the discrete wavelet transform.

mod cascade;
pub mod construct;
mod dwt;
mod filters;
mod taps;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use cascade::{cascade, edge_cascades, ScalingSamples, Which, DEFAULT_RESOLUTION};
pub use dwt::{dwt_matrix_apply, Direction, Dwt};
pub use filters::{
    data_file_name, decode_filter_set, encode_filter_set, load_filters, read_filter_file,
    write_filter_file, BoundaryFilterSet, EdgeFilters, Matrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Daubechies,
    Symlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Vmp,
}

/// Wavelet family, number of vanishing moments and boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WaveletSpec {
    pub family: Family,
    pub nu: usize,
    pub boundary: Boundary,
}

pub const MAX_NU: usize = 6;

impl WaveletSpec {
    pub fn new(family: Family, nu: usize, boundary: Boundary) -> Result<Self> {
        let spec = WaveletSpec {
            family,
            nu,
            boundary,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn daubechies(nu: usize, boundary: Boundary) -> Result<Self> {
        Self::new(Family::Daubechies, nu, boundary)
    }

    pub fn symlet(nu: usize, boundary: Boundary) -> Result<Self> {
        Self::new(Family::Symlet, nu, boundary)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu == 0 || self.nu > MAX_NU {
            return Err(Error::Unsupported(format!(
                "{} vanishing moments (supported: 1..={MAX_NU})",
                self.nu
            )));
        }
        if self.boundary == Boundary::Vmp && self.nu < 2 {
            return Err(Error::Unsupported(
                "boundary-corrected (vmp) mode needs at least 2 vanishing moments".into(),
            ));
        }
        Ok(())
    }

    /// Taps `h_k` for `k = -nu + 1 ..= nu`.
    pub fn taps(&self) -> &'static [f64] {
        let t = match self.family {
            Family::Daubechies => taps::daubechies(self.nu),
            Family::Symlet => taps::symlet(self.nu),
        };
        t.expect("validated spec")
    }

    /// Coarsest admissible level `ceil(log2(2 nu))`.
    pub fn j0(&self) -> u32 {
        (2 * self.nu).next_power_of_two().trailing_zeros()
    }

    pub fn check_level(&self, j: u32) -> Result<()> {
        if j < self.j0() {
            Err(Error::LevelTooSmall {
                spec: *self,
                j,
                j0: self.j0(),
            })
        } else {
            Ok(())
        }
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        WaveletSpec { boundary, ..self }
    }

    /// Short name such as `db4` or `sym6`.
    pub fn name(&self) -> String {
        let prefix = match self.family {
            Family::Daubechies => "db",
            Family::Symlet => "sym",
        };
        format!("{prefix}{}", self.nu)
    }
}

impl fmt::Display for WaveletSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name(), self.boundary)
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Vmp => "vmp",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" | "per" => Ok(Boundary::Periodic),
            "vmp" | "bd" => Ok(Boundary::Vmp),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary {other:?}"
            ))),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "db" | "daubechies" => Ok(Family::Daubechies),
            "sym" | "symlet" | "symlets" => Ok(Family::Symlet),
            other => Err(Error::InvalidParameter(format!(
                "unknown wavelet family {other:?}"
            ))),
        }
    }
}

/// Parses a wavelet name like `db4`, `sym5` or `haar` into family and `nu`.
pub fn parse_wavelet_name(name: &str) -> Result<(Family, usize)> {
    let lower = name.to_ascii_lowercase();
    if lower == "haar" {
        return Ok((Family::Daubechies, 1));
    }
    let split = lower
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(|| Error::InvalidParameter(format!("wavelet name {name:?} has no order")))?;
    let family: Family = lower[..split].parse()?;
    let nu: usize = lower[split..]
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad wavelet order in {name:?}")))?;
    Ok((family, nu))
}

/// Index helper for a filter stored from `k = -nu + 1`.
#[inline]
pub(crate) fn tap(h: &[f64], k: i64) -> f64 {
    let nu = (h.len() / 2) as i64;
    let i = k + nu - 1;
    if i < 0 || i >= h.len() as i64 {
        0.0
    } else {
        h[i as usize]
    }
}

/// High-pass taps `g_k = (-1)^k h_{1-k}` on the same index range.
pub(crate) fn highpass(h: &[f64]) -> Vec<f64> {
    let nu = (h.len() / 2) as i64;
    (-nu + 1..=nu)
        .map(|k| {
            let s = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            s * tap(h, 1 - k)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing_and_levels() {
        assert_eq!(parse_wavelet_name("db4").unwrap(), (Family::Daubechies, 4));
        assert_eq!(parse_wavelet_name("Sym6").unwrap(), (Family::Symlet, 6));
        assert_eq!(parse_wavelet_name("haar").unwrap(), (Family::Daubechies, 1));
        assert!(parse_wavelet_name("coif2").is_err());
        let s = WaveletSpec::daubechies(2, Boundary::Vmp).unwrap();
        assert_eq!(s.j0(), 2);
        assert_eq!(WaveletSpec::daubechies(3, Boundary::Vmp).unwrap().j0(), 3);
        assert_eq!(WaveletSpec::daubechies(6, Boundary::Vmp).unwrap().j0(), 4);
        assert_eq!(
            WaveletSpec::daubechies(1, Boundary::Periodic).unwrap().j0(),
            1
        );
        assert!(WaveletSpec::daubechies(1, Boundary::Vmp).is_err());
        assert!(WaveletSpec::daubechies(7, Boundary::Periodic).is_err());
        assert!(s.check_level(1).is_err());
    }

    #[test]
    fn interior_filter_identities() {
        for nu in 1..=MAX_NU {
            for fam in [Family::Daubechies, Family::Symlet] {
                let h = WaveletSpec::new(fam, nu, Boundary::Periodic)
                    .unwrap()
                    .taps();
                assert_eq!(h.len(), 2 * nu);
                let sum: f64 = h.iter().sum();
                assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12);
                let sq: f64 = h.iter().map(|x| x * x).sum();
                assert!((sq - 1.0).abs() < 1e-12);
                for shift in 1..nu as i64 {
                    let ip: f64 = (-(nu as i64) + 1..=nu as i64)
                        .map(|k| tap(h, k) * tap(h, k + 2 * shift))
                        .sum();
                    assert!(ip.abs() < 1e-12);
                }
                let g = highpass(h);
                let dot: f64 = h.iter().zip(&g).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-14);
            }
        }
    }

    /// |H(w)|^2 evaluated directly on a frequency grid.
    fn power(h: &[f64], w: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, x) in h.iter().enumerate() {
            re += x * (w * k as f64).cos();
            im -= x * (w * k as f64).sin();
        }
        re * re + im * im
    }

    #[test]
    fn symlet_differs_in_phase_only() {
        let db = WaveletSpec::daubechies(4, Boundary::Periodic)
            .unwrap()
            .taps();
        let sym = WaveletSpec::symlet(4, Boundary::Periodic).unwrap().taps();
        let rev: Vec<f64> = sym.iter().rev().copied().collect();
        assert!(rev.iter().zip(sym).any(|(a, b)| (a - b).abs() > 1e-3));
        assert!(db.iter().zip(sym).any(|(a, b)| (a - b).abs() > 1e-3));
        for i in 0..64 {
            let w = std::f64::consts::PI * i as f64 / 63.0;
            assert!((power(db, w) - power(sym, w)).abs() < 1e-10);
        }
    }
}
