//! Generalized division hashing over GF(2^8): `M(x) * x^d mod P(x)` with
//! `d = deg P = n / 8`. Message byte `j` (bits `8j..8j+8`, least
//! significant first) is the coefficient of `x^j`; a trailing partial byte
//! is zero padded.

use crate::bits::BitString;
use crate::error::HashError;
use crate::gf::{is_irreducible_gf256, Gf256, Gf256Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GdhKey {
    poly: Gf256Poly,
}

impl GdhKey {
    pub fn new(poly: Gf256Poly) -> Result<Self, HashError> {
        let key = Self::from_poly_unchecked(poly)?;
        if !is_irreducible_gf256(&key.poly).map_err(|e| HashError::InvalidKey(e.to_string()))? {
            return Err(HashError::InvalidKey("polynomial is reducible".into()));
        }
        Ok(key)
    }

    /// Checks only that the polynomial is monic of degree at least 1.
    pub fn from_poly_unchecked(poly: Gf256Poly) -> Result<Self, HashError> {
        match poly.degree() {
            Some(d) if d >= 1 && poly.is_monic() => Ok(Self { poly }),
            _ => Err(HashError::InvalidKey(
                "modulus must be monic of degree at least 1".into(),
            )),
        }
    }

    pub fn degree(&self) -> usize {
        self.poly.degree().expect("validated")
    }

    pub fn n(&self) -> usize {
        8 * self.degree()
    }

    pub fn poly(&self) -> &Gf256Poly {
        &self.poly
    }
}

/// Streaming evaluation: `acc += b_j * t_j` with `t_j = x^(d+j) mod P`.
#[derive(Clone, Debug)]
pub struct GdhHasher {
    /// Low coefficients of the monic modulus.
    low: Vec<Gf256>,
    term: Vec<Gf256>,
    acc: Vec<Gf256>,
    absorbed: usize,
}

impl GdhHasher {
    pub fn new(key: &GdhKey) -> Self {
        let d = key.degree();
        let low = key.poly.coeffs()[..d].to_vec();
        let mut h = Self {
            low,
            term: vec![Gf256::ZERO; d],
            acc: vec![Gf256::ZERO; d],
            absorbed: 0,
        };
        // x^d mod P = -(low part) = low part in characteristic 2
        h.term.copy_from_slice(&h.low);
        h
    }

    /// `term <- term * x mod P`.
    #[inline]
    fn step(&mut self) {
        let d = self.term.len();
        let carry = self.term[d - 1];
        for i in (1..d).rev() {
            self.term[i] = self.term[i - 1] + carry * self.low[i];
        }
        self.term[0] = carry * self.low[0];
    }

    pub fn absorb_byte(&mut self, b: u8) {
        if b != 0 {
            let c = Gf256(b);
            for (a, &t) in self.acc.iter_mut().zip(&self.term) {
                *a = *a + c * t;
            }
        }
        self.step();
        self.absorbed += 1;
    }

    pub fn absorb_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.absorb_byte(b);
        }
    }

    pub fn finish(self) -> BitString {
        let bytes: Vec<u8> = self.acc.iter().map(|c| c.0).collect();
        BitString::from_bytes(&bytes)
    }
}

pub fn gdh_hash(key: &GdhKey, message: &BitString) -> BitString {
    let mut h = GdhHasher::new(key);
    h.absorb_bytes(&message.to_bytes());
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_is_a_field_multiply() {
        // P = x + c, n = 8: b * x mod (x + c) = b * c
        for c in [1u8, 2, 0x53, 0xff] {
            let key = GdhKey::new(Gf256Poly::from_bytes(&[c, 1])).unwrap();
            for b in [0u8, 1, 7, 0xca] {
                let d = gdh_hash(&key, &BitString::from_bytes(&[b]));
                assert_eq!(d.to_bytes(), vec![(Gf256(b) * Gf256(c)).0]);
            }
        }
    }

    #[test]
    fn zero_message_gives_zero_digest() {
        let key = GdhKey::from_poly_unchecked(Gf256Poly::from_bytes(&[0x1b, 0x07, 1])).unwrap();
        let d = gdh_hash(&key, &BitString::zeros(100));
        assert_eq!(d.len(), 16);
        assert!(d.is_zero());
    }

    #[test]
    fn partial_byte_is_zero_padded() {
        let key = GdhKey::from_poly_unchecked(Gf256Poly::from_bytes(&[3, 1])).unwrap();
        let short = BitString::from_bits([true, false, true]);
        let padded = BitString::from_bytes(&[0b101]);
        assert_eq!(gdh_hash(&key, &short), gdh_hash(&key, &padded));
    }
}
