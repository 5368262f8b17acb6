//! LFSR-based Toeplitz hashing.
//!
//! The key is a monic degree-`n` polynomial `p(x) = x^n + p_{n-1}x^{n-1} +
//! ... + p_0` and an `n`-bit initial state `s = (a_n, ..., a_1)`, top to
//! bottom. State bit `i` holds `a_{i+1}`, so the top row is bit `n - 1`.
//! Each shift moves every row down and feeds `a_{n+1} = sum p_i a_{i+1}`
//! into the top, which is multiplication by the companion matrix `W` of
//! `p`. The digest of `M` is `sum_j M_j W^j s`.

use crate::bits::BitString;
use crate::error::HashError;
use crate::gf::{is_irreducible_gf2, Gf2Poly};

/// Largest explicit matrix the oracle will build, in bits.
pub const EXPLICIT_LIMIT_BITS: u128 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LfsrKey {
    poly: Gf2Poly,
    state: BitString,
}

impl LfsrKey {
    /// Validates degree, length and irreducibility.
    pub fn new(poly: Gf2Poly, state: BitString) -> Result<Self, HashError> {
        let key = Self::from_parts_unchecked(poly, state)?;
        if !is_irreducible_gf2(&key.poly).map_err(|e| HashError::InvalidKey(e.to_string()))? {
            return Err(HashError::InvalidKey("polynomial is reducible".into()));
        }
        Ok(key)
    }

    /// Checks only that `deg p = len s >= 1`.
    pub fn from_parts_unchecked(poly: Gf2Poly, state: BitString) -> Result<Self, HashError> {
        match poly.degree() {
            Some(d) if d >= 1 && d == state.len() => Ok(Self { poly, state }),
            d => Err(HashError::InvalidKey(format!(
                "polynomial degree {d:?} does not match state length {}",
                state.len()
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.state.len()
    }

    pub fn poly(&self) -> &Gf2Poly {
        &self.poly
    }

    pub fn state(&self) -> &BitString {
        &self.state
    }

    /// Feedback taps `p_0..p_{n-1}` packed like a state.
    fn taps(&self) -> Vec<u64> {
        self.poly.to_bits(self.n()).words().to_vec()
    }
}

/// One LFSR step on a packed state of `n` bits.
#[inline]
fn shift(state: &mut [u64], taps: &[u64], n: usize) {
    let fb = state
        .iter()
        .zip(taps)
        .fold(0u32, |acc, (s, t)| acc ^ (s & t).count_ones())
        & 1;
    let len = state.len();
    for i in 0..len {
        let next = if i + 1 < len { state[i + 1] << 63 } else { 0 };
        state[i] = (state[i] >> 1) | next;
    }
    let top = n - 1;
    state[top / 64] |= (fb as u64) << (top % 64);
}

/// Streaming evaluation keeping only the current column and the accumulator.
#[derive(Clone, Debug)]
pub struct LfsrHasher {
    taps: Vec<u64>,
    column: Vec<u64>,
    acc: Vec<u64>,
    n: usize,
    absorbed: usize,
}

impl LfsrHasher {
    pub fn new(key: &LfsrKey) -> Self {
        Self {
            taps: key.taps(),
            column: key.state.words().to_vec(),
            acc: vec![0; key.n().div_ceil(64)],
            n: key.n(),
            absorbed: 0,
        }
    }

    #[inline]
    pub fn absorb_bit(&mut self, bit: bool) {
        if bit {
            for (a, c) in self.acc.iter_mut().zip(&self.column) {
                *a ^= c;
            }
        }
        shift(&mut self.column, &self.taps, self.n);
        self.absorbed += 1;
    }

    pub fn absorb(&mut self, bits: &BitString) {
        for (w, &word) in bits.words().iter().enumerate() {
            let count = (bits.len() - 64 * w).min(64);
            for b in 0..count {
                self.absorb_bit((word >> b) & 1 == 1);
            }
        }
    }

    pub fn absorbed(&self) -> usize {
        self.absorbed
    }

    pub fn finish(self) -> Result<BitString, HashError> {
        if self.absorbed == 0 {
            return Err(HashError::EmptyMessage);
        }
        Ok(BitString::from_words(self.acc, self.n))
    }
}

/// `H_{nm} M` without building the matrix.
pub fn lfsr_toeplitz_hash(key: &LfsrKey, message: &BitString) -> Result<BitString, HashError> {
    if message.is_empty() {
        return Err(HashError::EmptyMessage);
    }
    let mut h = LfsrHasher::new(key);
    h.absorb(message);
    h.finish()
}

/// The `n x m` matrix as a list of columns, built directly from the LFSR
/// output sequence `a_1, a_2, ...` (column `j`, bit `i` is `a_{i+1+j}`).
pub fn toeplitz_matrix_explicit(key: &LfsrKey, m: usize) -> Result<Vec<BitString>, HashError> {
    let n = key.n();
    let bits = n as u128 * m as u128;
    if bits > EXPLICIT_LIMIT_BITS {
        return Err(HashError::TooLarge {
            bits,
            limit: EXPLICIT_LIMIT_BITS,
        });
    }
    if m == 0 {
        return Err(HashError::EmptyMessage);
    }
    // a[k] holds a_{k+1}
    let mut a: Vec<bool> = key.state.iter().collect();
    while a.len() < n + m - 1 {
        let k = a.len() - n;
        let next = (0..n).fold(false, |acc, i| acc ^ (key.poly.coeff(i) & a[k + i]));
        a.push(next);
    }
    Ok((0..m)
        .map(|j| BitString::from_bits((0..n).map(|i| a[i + j])))
        .collect())
}

/// Dense matrix-vector product over GF(2).
pub fn apply_columns(columns: &[BitString], message: &BitString) -> BitString {
    assert_eq!(columns.len(), message.len(), "matrix width mismatch");
    let n = columns.first().map_or(0, BitString::len);
    let mut out = BitString::zeros(n);
    for (j, c) in columns.iter().enumerate() {
        if message.get(j) {
            out.xor_assign(c);
        }
    }
    out
}
