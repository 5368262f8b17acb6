//! Polynomials over GF(2), packed 64 coefficients per word.
//!
//! Coefficient of `x^i` is bit `i % 64` of word `i / 64`. Trailing zero
//! words are trimmed, so the zero polynomial has no words and equal
//! polynomials compare equal.

use std::fmt;

use crate::bits::BitString;
use crate::error::GfError;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

#[cfg(test)]
/// Carry-less 64x64 -> 128 multiply with a 4-bit window.
#[inline]
fn clmul64(a: u64, b: u64) -> u128 {
    let table = window_table(a);
    clmul64_with(&table, b)
}

#[inline]
fn window_table(a: u64) -> [u128; 16] {
    let mut t = [0u128; 16];
    t[1] = a as u128;
    for i in 2..16 {
        t[i] = if i % 2 == 0 {
            t[i / 2] << 1
        } else {
            t[i - 1] ^ t[1]
        };
    }
    t
}

#[inline]
fn clmul64_with(table: &[u128; 16], b: u64) -> u128 {
    let mut r = 0u128;
    for k in (0..16).rev() {
        r = (r << 4) ^ table[((b >> (4 * k)) & 15) as usize];
    }
    r
}

#[inline]
fn spread32(x: u64) -> u64 {
    let mut x = x & 0xffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self { words: vec![1] }
    }

    pub fn x() -> Self {
        Self { words: vec![2] }
    }

    pub fn monomial(k: usize) -> Self {
        let mut words = vec![0u64; k / 64 + 1];
        words[k / 64] = 1u64 << (k % 64);
        Self { words }
    }

    pub fn from_u64(bits: u64) -> Self {
        Self::from_words(vec![bits])
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        let mut p = Self { words };
        p.trim();
        p
    }

    /// Coefficient `i` taken from bit `i` of `bits`.
    pub fn from_bits(bits: &BitString) -> Self {
        Self::from_words(bits.words().to_vec())
    }

    /// Builds a polynomial from the exponents of its nonzero terms.
    pub fn from_exponents(exps: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exps {
            p.toggle_coeff(e);
        }
        p
    }

    /// Coefficients `0..len` as a bit string.
    pub fn to_bits(&self, len: usize) -> BitString {
        let mut words = self.words.clone();
        words.truncate(len.div_ceil(64));
        BitString::from_words(words, len)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// `None` for the zero polynomial (degree minus infinity).
    pub fn degree(&self) -> Option<usize> {
        let last = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.words.len() == 1 && self.words[0] == 1
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    pub fn toggle_coeff(&mut self, i: usize) {
        if self.words.len() <= i / 64 {
            self.words.resize(i / 64 + 1, 0);
        }
        self.words[i / 64] ^= 1u64 << (i % 64);
        self.trim();
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Gf2Poly) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        self.trim();
    }

    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        if self.is_zero() || other.is_zero() {
            return Gf2Poly::zero();
        }
        let mut out = vec![0u64; self.words.len() + other.words.len()];
        for (i, &a) in self.words.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let table = window_table(a);
            for (j, &b) in other.words.iter().enumerate() {
                let r = clmul64_with(&table, b);
                out[i + j] ^= r as u64;
                out[i + j + 1] ^= (r >> 64) as u64;
            }
        }
        Gf2Poly::from_words(out)
    }

    pub fn square(&self) -> Gf2Poly {
        let mut out = Vec::with_capacity(self.words.len() * 2);
        for &w in &self.words {
            out.push(spread32(w));
            out.push(spread32(w >> 32));
        }
        Gf2Poly::from_words(out)
    }

    pub fn shl(&self, k: usize) -> Gf2Poly {
        if self.is_zero() {
            return Gf2Poly::zero();
        }
        let (ws, bs) = (k / 64, k % 64);
        let mut out = vec![0u64; self.words.len() + ws + 1];
        for (i, &w) in self.words.iter().enumerate() {
            out[i + ws] ^= w << bs;
            if bs != 0 {
                out[i + ws + 1] ^= w >> (64 - bs);
            }
        }
        Gf2Poly::from_words(out)
    }

    /// Quotient and remainder of division by `m`.
    pub fn div_rem(&self, m: &Gf2Poly) -> Result<(Gf2Poly, Gf2Poly), GfError> {
        let dm = m
            .degree()
            .ok_or_else(|| GfError::InvalidArgument("division by the zero polynomial".into()))?;
        let mut r = self.words.clone();
        let Some(da) = self.degree() else {
            return Ok((Gf2Poly::zero(), Gf2Poly::zero()));
        };
        if da < dm {
            return Ok((Gf2Poly::zero(), self.clone()));
        }
        let shifted = ShiftedModulus::new(m);
        let mut q = vec![0u64; (da - dm) / 64 + 1];
        for i in (dm..=da).rev() {
            if (r[i / 64] >> (i % 64)) & 1 == 1 {
                let s = i - dm;
                q[s / 64] |= 1u64 << (s % 64);
                shifted.xor_into(&mut r, s);
            }
        }
        Ok((Gf2Poly::from_words(q), Gf2Poly::from_words(r)))
    }

    pub fn rem(&self, m: &Gf2Poly) -> Result<Gf2Poly, GfError> {
        let dm = m
            .degree()
            .ok_or_else(|| GfError::InvalidArgument("reduction by the zero polynomial".into()))?;
        Ok(ShiftedModulus::new(m).reduce(self.words.clone(), dm))
    }

    /// `x^len * p(1/x)`: coefficient `i` moves to `len - i`.
    pub fn reciprocal(&self, len: usize) -> Gf2Poly {
        let mut out = Gf2Poly::zero();
        if let Some(d) = self.degree() {
            assert!(d <= len, "reciprocal length below degree");
            for i in 0..=d {
                if self.coeff(i) {
                    out.toggle_coeff(len - i);
                }
            }
        }
        out
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

/// A modulus with its 64 bit-shifted copies, for fast repeated reduction.
pub(crate) struct ShiftedModulus {
    shifted: Vec<Vec<u64>>,
    degree: usize,
    /// Low exponents when the modulus has few terms; enables word-wise folding.
    sparse: Option<Vec<usize>>,
}

impl ShiftedModulus {
    pub(crate) fn new(m: &Gf2Poly) -> Self {
        let degree = m.degree().expect("nonzero modulus");
        let shifted = (0..64)
            .map(|s| {
                let mut w = vec![0u64; m.words.len() + 1];
                for (i, &x) in m.words.iter().enumerate() {
                    w[i] ^= x << s;
                    if s != 0 {
                        w[i + 1] ^= x >> (64 - s);
                    }
                }
                w
            })
            .collect();
        let sparse = (m.weight() <= 7 && degree >= 2)
            .then(|| (0..degree).filter(|&i| m.coeff(i)).collect::<Vec<_>>());
        Self {
            shifted,
            degree,
            sparse,
        }
    }

    fn reduce_sparse(&self, r: &mut Vec<u64>, exps: &[usize]) {
        let n = self.degree;
        let step = (n - exps.iter().copied().max().unwrap_or(0)).min(64);
        loop {
            while r.last() == Some(&0) {
                r.pop();
            }
            let Some(&last) = r.last() else { return };
            let da = (r.len() - 1) * 64 + 63 - last.leading_zeros() as usize;
            if da < n {
                return;
            }
            let j = n.max(da + 1 - step);
            let width = da + 1 - j;
            let t = take_bits(r, j, width);
            for &e in exps {
                xor_bits(r, j - n + e, t);
            }
        }
    }

    #[inline]
    fn xor_into(&self, r: &mut [u64], s: usize) {
        let base = s / 64;
        for (k, &w) in self.shifted[s % 64].iter().enumerate() {
            if let Some(slot) = r.get_mut(base + k) {
                *slot ^= w;
            }
        }
    }

    pub(crate) fn reduce(&self, mut r: Vec<u64>, dm: usize) -> Gf2Poly {
        debug_assert_eq!(dm, self.degree);
        if dm == 0 {
            return Gf2Poly::zero();
        }
        if let Some(exps) = &self.sparse {
            self.reduce_sparse(&mut r, exps);
            return Gf2Poly::from_words(r);
        }
        while r.last() == Some(&0) {
            r.pop();
        }
        let Some(&last) = r.last() else {
            return Gf2Poly::zero();
        };
        let da = (r.len() - 1) * 64 + 63 - last.leading_zeros() as usize;
        if da >= dm {
            for i in (dm..=da).rev() {
                if (r[i / 64] >> (i % 64)) & 1 == 1 {
                    self.xor_into(&mut r, i - dm);
                }
            }
        }
        Gf2Poly::from_words(r)
    }

    pub(crate) fn mul_mod(&self, a: &Gf2Poly, b: &Gf2Poly) -> Gf2Poly {
        self.reduce(a.mul(b).words, self.degree)
    }

    pub(crate) fn square_mod(&self, a: &Gf2Poly) -> Gf2Poly {
        self.reduce(a.square().words, self.degree)
    }
}

/// Extracts and clears `width <= 64` bits starting at `start`.
fn take_bits(r: &mut [u64], start: usize, width: usize) -> u64 {
    let (w, b) = (start / 64, start % 64);
    let mask = if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    };
    let mut t = r[w] >> b;
    if b != 0 && w + 1 < r.len() {
        t |= r[w + 1] << (64 - b);
    }
    t &= mask;
    r[w] &= !(mask << b);
    if b != 0 && w + 1 < r.len() {
        r[w + 1] &= !(mask >> (64 - b));
    }
    t
}

fn xor_bits(r: &mut Vec<u64>, start: usize, t: u64) {
    let (w, b) = (start / 64, start % 64);
    if r.len() < w + 2 {
        r.resize(w + 2, 0);
    }
    r[w] ^= t << b;
    if b != 0 {
        r[w + 1] ^= t >> (64 - b);
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(d) = self.degree() else {
            return f.write_str("0");
        };
        let mut first = true;
        for i in (0..=d).rev() {
            if !self.coeff(i) {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

/// `(a * b) mod m`.
pub fn gf2_mul_mod(a: &Gf2Poly, b: &Gf2Poly, m: &Gf2Poly) -> Result<Gf2Poly, GfError> {
    match m.degree() {
        None | Some(0) => Err(GfError::InvalidArgument(
            "modulus must have degree at least 1".into(),
        )),
        Some(_) => Ok(ShiftedModulus::new(m).mul_mod(a, b)),
    }
}

/// Greatest common divisor; over GF(2) every nonzero result is monic.
pub fn gf2_gcd(a: &Gf2Poly, b: &Gf2Poly) -> Result<Gf2Poly, GfError> {
    if a.is_zero() && b.is_zero() {
        return Err(GfError::InvalidArgument("gcd(0, 0) is undefined".into()));
    }
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.rem(&b)?;
        a = b;
        b = r;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u64) -> Gf2Poly {
        Gf2Poly::from_u64(bits)
    }

    /// Bit-serial reference multiply.
    fn slow_mul(a: u64, b: u64) -> u128 {
        let mut r = 0u128;
        for i in 0..64 {
            if (b >> i) & 1 == 1 {
                r ^= (a as u128) << i;
            }
        }
        r
    }

    #[test]
    fn windowed_clmul_matches_bit_serial() {
        let samples = [
            (0u64, 5u64),
            (u64::MAX, u64::MAX),
            (0x8000_0000_0000_0001, 0x1234_5678_9abc_def0),
            (0xdead_beef, 0xfeed_f00d_cafe_babe),
        ];
        for (a, b) in samples {
            assert_eq!(clmul64(a, b), slow_mul(a, b));
        }
    }

    #[test]
    fn mul_mod_examples() {
        // x * x mod x^2+x+1 = x+1
        assert_eq!(gf2_mul_mod(&p(0b10), &p(0b10), &p(0b111)).unwrap(), p(0b11));
        assert_eq!(
            gf2_mul_mod(&Gf2Poly::zero(), &p(0b1011_0110), &p(0b1011)).unwrap(),
            Gf2Poly::zero()
        );
        let aes = p(0x11b);
        let v = Gf2Poly::from_exponents(&[5, 2]);
        assert_eq!(gf2_mul_mod(&Gf2Poly::one(), &v, &aes).unwrap(), v);
    }

    #[test]
    fn mul_mod_rejects_constant_modulus() {
        assert!(gf2_mul_mod(&p(3), &p(3), &Gf2Poly::zero()).is_err());
        assert!(gf2_mul_mod(&p(3), &p(3), &Gf2Poly::one()).is_err());
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gf2_gcd(&p(0b101), &p(0b11)).unwrap(), p(0b11));
        assert_eq!(gf2_gcd(&p(0b1011), &Gf2Poly::zero()).unwrap(), p(0b1011));
        assert_eq!(gf2_gcd(&p(0b1011), &p(0b111)).unwrap(), Gf2Poly::one());
        assert!(gf2_gcd(&Gf2Poly::zero(), &Gf2Poly::zero()).is_err());
    }

    #[test]
    fn div_rem_reconstructs_dividend() {
        let a = Gf2Poly::from_words(vec![0x1234_5678_9abc_def1, 0xfff, 0x3]);
        let m = Gf2Poly::from_words(vec![0xdead_beef_0000_0001, 0x5]);
        let (q, r) = a.div_rem(&m).unwrap();
        assert!(r.degree().unwrap_or(0) < m.degree().unwrap());
        assert_eq!(q.mul(&m).add(&r), a);
    }

    #[test]
    fn sparse_and_dense_reduction_agree() {
        let a = Gf2Poly::from_words(vec![
            0x0123_4567_89ab_cdef,
            0xfedc_ba98_7654_3210,
            0xdead_beef_cafe_f00d,
            0x77,
        ]);
        for m in [
            Gf2Poly::from_exponents(&[127, 1, 0]),
            Gf2Poly::from_exponents(&[70, 9, 3, 1, 0]),
            Gf2Poly::from_exponents(&[64, 4, 3, 1, 0]),
            Gf2Poly::from_exponents(&[5, 2, 0]),
        ] {
            let (_, dense) = a.div_rem(&m).unwrap();
            assert_eq!(a.rem(&m).unwrap(), dense, "modulus {m}");
        }
    }

    #[test]
    fn square_equals_self_multiply() {
        let a = Gf2Poly::from_words(vec![0x0123_4567_89ab_cdef, 0xf0f0]);
        assert_eq!(a.square(), a.mul(&a));
    }

    #[test]
    fn degree_and_display() {
        assert_eq!(Gf2Poly::zero().degree(), None);
        assert_eq!(Gf2Poly::monomial(130).degree(), Some(130));
        assert_eq!(p(0b1011).to_string(), "x^3 + x + 1");
        assert_eq!(p(0b1011).reciprocal(3), p(0b1101));
    }
}
