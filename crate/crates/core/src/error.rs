use std::path::PathBuf;

use thiserror::Error;

use crate::wavelet::WaveletSpec;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported wavelet configuration: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("level j = {j} is below the minimal level {j0} for {spec}")]
    LevelTooSmall { spec: WaveletSpec, j: u32, j0: u32 },

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("checksum mismatch in {0}")]
    Checksum(PathBuf),

    #[error("format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("header mismatch: {0}")]
    HeaderMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("infeasible constraint: least-squares residual {residual:e} exceeds eta {eta:e}")]
    Infeasible { residual: f64, eta: f64 },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures rooted in arithmetic rather than input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::NoConvergence { .. } | Error::Infeasible { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Checksum(_) | Error::Corrupt(_) | Error::Version { .. }
        )
    }
}
