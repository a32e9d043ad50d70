//! Dyadic rationals, sequency-ordered Walsh functions and the fast
//! Walsh-Hadamard transform.

use crate::error::{Error, Result};

/// The exact dyadic number `p / 2^j` with `0 <= p < 2^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    p: u64,
    j: u32,
}

impl Dyadic {
    pub const MAX_SCALE: u32 = 62;

    pub fn new(p: u64, j: u32) -> Result<Self> {
        if j > Self::MAX_SCALE {
            return Err(Error::InvalidParameter(format!(
                "dyadic scale {j} too large"
            )));
        }
        if p >> j != 0 {
            return Err(Error::InvalidParameter(format!(
                "{p}/2^{j} is not in [0,1)"
            )));
        }
        Ok(Dyadic { p, j })
    }

    /// Reduces `p` modulo `2^j`, i.e. the fractional part of `p / 2^j`.
    pub fn wrapping(p: i64, j: u32) -> Self {
        assert!(j <= Self::MAX_SCALE);
        let mask = (1u64 << j) - 1;
        Dyadic {
            p: (p as u64) & mask,
            j,
        }
    }

    pub fn zero() -> Self {
        Dyadic { p: 0, j: 0 }
    }

    pub fn numerator(self) -> u64 {
        self.p
    }

    pub fn scale(self) -> u32 {
        self.j
    }

    pub fn value(self) -> f64 {
        self.p as f64 / (1u64 << self.j) as f64
    }

    /// Same number expressed at a finer scale `j' >= j`.
    pub fn rescale(self, j: u32) -> Self {
        assert!(j >= self.j && j <= Self::MAX_SCALE);
        Dyadic {
            p: self.p << (j - self.j),
            j,
        }
    }

    /// The `i`-th binary digit after the point, `i >= 1`.
    pub fn digit(self, i: u32) -> u8 {
        if i == 0 || i > self.j {
            0
        } else {
            ((self.p >> (self.j - i)) & 1) as u8
        }
    }
}

/// Digit-wise XOR of two dyadic expansions, at the finer of the two scales.
pub fn dyadic_xor(x: Dyadic, y: Dyadic) -> Dyadic {
    let j = x.j.max(y.j);
    let (x, y) = (x.rescale(j), y.rescale(j));
    Dyadic { p: x.p ^ y.p, j }
}

#[inline]
pub fn gray(n: u64) -> u64 {
    n ^ (n >> 1)
}

#[inline]
pub fn bit_reverse(p: u64, bits: u32) -> u64 {
    if bits == 0 {
        0
    } else {
        p.reverse_bits() >> (64 - bits)
    }
}

/// Sign of the Walsh function `w_n` at the dyadic point `x`.
///
/// Digit `i` of `x` pairs with `n^(i) + n^(i+1)`, which is bit `i-1` of the
/// Gray code of `n`.
#[inline]
pub fn walsh_eval(n: u64, x: Dyadic) -> i8 {
    if (gray(n) & bit_reverse(x.p, x.j)).count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

/// `w_n(p / 2^j)` for raw integers.
#[inline]
pub fn walsh_sign(n: u64, p: u64, j: u32) -> f64 {
    if (gray(n) & bit_reverse(p, j)).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    Natural,
    Sequency,
}

impl std::str::FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" | "hadamard" => Ok(Ordering::Natural),
            "sequency" | "walsh" => Ok(Ordering::Sequency),
            other => Err(Error::InvalidParameter(format!(
                "unknown ordering tag {other:?}"
            ))),
        }
    }
}

fn log2_exact(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        Err(Error::NotPowerOfTwo(len))
    } else {
        Ok(len.trailing_zeros())
    }
}

/// Index in natural order holding sequency index `n` of a length `2^r` transform.
#[inline]
pub fn sequency_to_natural_index(n: usize, r: u32) -> usize {
    bit_reverse(gray(n as u64), r) as usize
}

/// Blocks up to this length run stage by stage; longer ones recurse on halves
/// first so that the early stages stay in cache.
const FWHT_BLOCK: usize = 1 << 12;

/// Butterflies of a length-`2h` block. With `sequency` set, the upper half of
/// each block swaps sum and difference, which leaves the sequency-ordered
/// transform in bit-reversed order.
#[inline]
fn butterfly(a: &mut [f64], b: &mut [f64], sequency: bool) {
    let h = a.len();
    let split = if sequency { (h / 2).max(1) } else { h };
    let (a_lo, a_hi) = a.split_at_mut(split);
    let (b_lo, b_hi) = b.split_at_mut(split);
    for (x, y) in a_lo.iter_mut().zip(b_lo.iter_mut()) {
        let (s, d) = (*x + *y, *x - *y);
        *x = s;
        *y = d;
    }
    for (x, y) in a_hi.iter_mut().zip(b_hi.iter_mut()) {
        let (s, d) = (*x + *y, *x - *y);
        *x = d;
        *y = s;
    }
}

fn transform(v: &mut [f64], sequency: bool) {
    let n = v.len();
    if n <= FWHT_BLOCK {
        let mut h = 1;
        while h < n {
            for block in v.chunks_exact_mut(2 * h) {
                let (a, b) = block.split_at_mut(h);
                butterfly(a, b, sequency);
            }
            h *= 2;
        }
    } else {
        let (a, b) = v.split_at_mut(n / 2);
        transform(a, sequency);
        transform(b, sequency);
        butterfly(a, b, sequency);
    }
}

/// Unnormalized Hadamard transform in natural order, in place.
pub fn fwht_natural(v: &mut [f64]) -> Result<()> {
    log2_exact(v.len())?;
    transform(v, false);
    Ok(())
}

/// Swaps `v[i]` and `v[bit_reverse(i, r)]` for every `i`.
pub fn bit_reverse_permute(v: &mut [f64], r: u32) {
    for i in 0..v.len() {
        let k = bit_reverse(i as u64, r) as usize;
        if i < k {
            v.swap(i, k);
        }
    }
}

/// Unnormalized Walsh-Hadamard transform in sequency order, in place:
/// `v[n] <- sum_k w_n(k / 2^r) v[k]`.
pub fn fwht_sequency(v: &mut [f64]) -> Result<()> {
    let r = log2_exact(v.len())?;
    transform(v, true);
    bit_reverse_permute(v, r);
    Ok(())
}

/// [`fwht_sequency`] without the final reordering: sequency coefficient `n`
/// ends up in `v[bit_reverse(n, r)]`.
pub fn fwht_sequency_bit_reversed(v: &mut [f64]) -> Result<()> {
    log2_exact(v.len())?;
    transform(v, true);
    Ok(())
}

/// Out-of-place wrapper around [`fwht_sequency`].
pub fn fwht_sequency_copy(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_sequency(&mut out)?;
    Ok(out)
}

/// Reorders a transformed vector between natural and sequency order.
pub fn ordering_convert(v: &[f64], from: Ordering, to: Ordering) -> Result<Vec<f64>> {
    let r = log2_exact(v.len())?;
    let mut out = v.to_vec();
    match (from, to) {
        (Ordering::Natural, Ordering::Sequency) => {
            for (n, o) in out.iter_mut().enumerate() {
                *o = v[sequency_to_natural_index(n, r)];
            }
        }
        (Ordering::Sequency, Ordering::Natural) => {
            for (n, &x) in v.iter().enumerate() {
                out[sequency_to_natural_index(n, r)] = x;
            }
        }
        _ => {}
    }
    Ok(out)
}
