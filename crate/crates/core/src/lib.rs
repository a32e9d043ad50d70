//! Matrix-free Walsh-to-wavelet change-of-basis operators.
//!
//! The crate evaluates the truncated change of basis between sequency-ordered
//! Walsh functions and orthonormal Daubechies-type scaling functions on
//! `[0, 1]` (periodized or boundary corrected) in `O(N log N)` time, and uses
//! it for generalised sampling, PBDW and compressive-sensing reconstruction.

pub mod error;
pub mod fastop;
pub mod functions;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod reconstruct;
pub mod walsh;
pub mod wavelet;

pub use error::{Error, Result};
