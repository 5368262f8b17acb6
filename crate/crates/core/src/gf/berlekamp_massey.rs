//! Berlekamp–Massey over GF(2) and GF(2^8).

use crate::bits::BitString;
use crate::error::GfError;

use super::gf256::{Gf256, Gf256Poly};
use super::Gf2Poly;

/// Minimal field interface needed by the synthesis loop.
pub trait Field: Copy + PartialEq {
    const ZERO: Self;
    const ONE: Self;
    fn add(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;
    fn inv(self) -> Self;
}

impl Field for bool {
    const ZERO: Self = false;
    const ONE: Self = true;
    fn add(self, other: Self) -> Self {
        self ^ other
    }
    fn mul(self, other: Self) -> Self {
        self & other
    }
    fn inv(self) -> Self {
        assert!(self, "inverse of zero");
        true
    }
}

impl Field for Gf256 {
    const ZERO: Self = Gf256(0);
    const ONE: Self = Gf256(1);
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn inv(self) -> Self {
        Gf256::inv(self).expect("inverse of zero")
    }
}

/// Shortest LFSR generating `seq`: connection coefficients `c[0] = 1, ...`
/// with `sum_{i=0..=L} c[i] s[k-i] = 0` for all `k >= L`, and `L`.
pub fn synthesize<F: Field>(seq: &[F]) -> (Vec<F>, usize) {
    let mut c = vec![F::ONE];
    let mut b = vec![F::ONE];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut last_d = F::ONE;
    for n in 0..seq.len() {
        let mut d = seq[n];
        for i in 1..=l.min(c.len() - 1) {
            d = d.add(c[i].mul(seq[n - i]));
        }
        if d == F::ZERO {
            shift += 1;
            continue;
        }
        let coef = d.mul(last_d.inv());
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, F::ZERO);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] = c[i + shift].add(coef.mul(bi));
        }
        if 2 * l <= n {
            l = n + 1 - l;
            b = prev;
            last_d = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.resize(l + 1, F::ZERO);
    (c, l)
}

/// A linear recurrence over GF(2) in connection-polynomial form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRecurrence {
    /// `C(x) = 1 + c_1 x + ... + c_L x^L`.
    pub connection: Gf2Poly,
    /// Linear complexity `L`.
    pub length: usize,
}

impl LinearRecurrence {
    /// Characteristic polynomial `x^L C(1/x)`, monic of degree `L`.
    pub fn characteristic(&self) -> Gf2Poly {
        self.connection.reciprocal(self.length)
    }

    /// Whether the recurrence regenerates `seq` from its first `L` terms.
    pub fn generates(&self, seq: &BitString) -> bool {
        let l = self.length;
        (l..seq.len()).all(|k| {
            let mut acc = false;
            for i in 1..=l {
                if self.connection.coeff(i) {
                    acc ^= seq.get(k - i);
                }
            }
            acc == seq.get(k)
        })
    }
}

/// Minimal recurrence for an even-length bit sequence.
pub fn berlekamp_massey_gf2(seq: &BitString) -> Result<LinearRecurrence, GfError> {
    if !seq.len().is_multiple_of(2) {
        return Err(GfError::InvalidArgument(format!(
            "sequence length {} is odd",
            seq.len()
        )));
    }
    let bits: Vec<bool> = seq.iter().collect();
    let (c, length) = synthesize(&bits);
    let exps: Vec<usize> = c
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    Ok(LinearRecurrence {
        connection: Gf2Poly::from_exponents(&exps),
        length,
    })
}

/// Minimal recurrence over GF(2^8); returns the monic characteristic
/// polynomial and the linear complexity.
pub fn berlekamp_massey_gf256(seq: &[Gf256]) -> Result<(Gf256Poly, usize), GfError> {
    if !seq.len().is_multiple_of(2) {
        return Err(GfError::InvalidArgument(format!(
            "sequence length {} is odd",
            seq.len()
        )));
    }
    let (c, l) = synthesize(seq);
    let coeffs: Vec<Gf256> = c.into_iter().rev().collect();
    Ok((Gf256Poly::from_coeffs(coeffs), l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(bits: &[u8]) -> BitString {
        BitString::from_bits(bits.iter().map(|&b| b == 1))
    }

    #[test]
    fn zero_sequence_has_empty_recurrence() {
        let r = berlekamp_massey_gf2(&BitString::zeros(10)).unwrap();
        assert_eq!(r.length, 0);
        assert!(r.connection.is_one());
    }

    #[test]
    fn period_three_sequence() {
        let s = seq(&[1, 0, 0, 1, 0, 0, 1, 0]);
        let r = berlekamp_massey_gf2(&s).unwrap();
        assert!(r.generates(&s));
        assert!(r.length <= 3);
        // every regenerating recurrence must annihilate the sequence
        let x3_1 = LinearRecurrence {
            connection: Gf2Poly::from_exponents(&[0, 3]),
            length: 3,
        };
        assert!(x3_1.generates(&s));
    }

    #[test]
    fn odd_length_is_rejected() {
        assert!(berlekamp_massey_gf2(&seq(&[1, 0, 1])).is_err());
    }

    #[test]
    fn recovers_lfsr_from_primitive_trinomial() {
        // s_{k+4} = s_{k+1} + s_k  (x^4 + x + 1)
        let mut v = vec![1u8, 0, 1, 1];
        for k in 0..4 {
            let next = v[k + 1] ^ v[k];
            v.push(next);
        }
        let s = seq(&v);
        let r = berlekamp_massey_gf2(&s).unwrap();
        assert!(r.generates(&s));
        assert_eq!(r.characteristic(), Gf2Poly::from_exponents(&[4, 1, 0]));
    }
}
