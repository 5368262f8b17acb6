//! Monic polynomials as `n`-bit strings with the leading coefficient
//! implicit. Over GF(2) bit `i` is the coefficient of `x^i`; over GF(2^8)
//! coefficient `i` occupies bits `8i..8i+8`.

use crate::bits::BitString;
use crate::error::FormatError;
use crate::gf::{Gf256Poly, Gf2Poly};

pub fn encode_gf2_poly(p: &Gf2Poly) -> Result<BitString, FormatError> {
    match p.degree() {
        Some(n) if n >= 1 => Ok(p.to_bits(n)),
        _ => Err(FormatError::Malformed(
            "only polynomials of degree >= 1 are encodable".into(),
        )),
    }
}

/// Inverse of [`encode_gf2_poly`]; the all-zero string decodes to `x^n`.
pub fn decode_gf2_poly(bits: &BitString) -> Result<Gf2Poly, FormatError> {
    if bits.is_empty() {
        return Err(FormatError::Length {
            expected: 1,
            found: 0,
        });
    }
    let mut p = Gf2Poly::from_bits(bits);
    p.toggle_coeff(bits.len());
    Ok(p)
}

pub fn encode_gf256_poly(p: &Gf256Poly) -> Result<BitString, FormatError> {
    match p.degree() {
        Some(d) if d >= 1 && p.is_monic() => {
            let bytes: Vec<u8> = p.coeffs()[..d].iter().map(|c| c.0).collect();
            Ok(BitString::from_bytes(&bytes))
        }
        _ => Err(FormatError::Malformed(
            "only monic polynomials of degree >= 1 are encodable".into(),
        )),
    }
}

pub fn decode_gf256_poly(bits: &BitString) -> Result<Gf256Poly, FormatError> {
    if bits.is_empty() || !bits.len().is_multiple_of(8) {
        return Err(FormatError::Malformed(format!(
            "length {} is not a positive multiple of 8",
            bits.len()
        )));
    }
    let mut bytes = bits.to_bytes();
    bytes.push(1);
    Ok(Gf256Poly::from_bytes(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_layout() {
        let p = Gf2Poly::from_u64(0b1011);
        let b = encode_gf2_poly(&p).unwrap();
        // wire order (p_2, p_1, p_0) = (0, 1, 1)
        let wire: Vec<bool> = (0..3).rev().map(|i| b.get(i)).collect();
        assert_eq!(wire, vec![false, true, true]);
        assert_eq!(decode_gf2_poly(&b).unwrap(), p);
    }

    #[test]
    fn zero_string_decodes_to_monomial() {
        assert_eq!(
            decode_gf2_poly(&BitString::zeros(9)).unwrap(),
            Gf2Poly::monomial(9)
        );
        let q = decode_gf256_poly(&BitString::zeros(16)).unwrap();
        assert_eq!(q.degree(), Some(2));
        assert!(q.coeff(0).is_zero() && q.coeff(1).is_zero());
    }

    #[test]
    fn gf256_roundtrip_and_bad_length() {
        let q = Gf256Poly::from_bytes(&[0xaa, 0x01, 0x7f, 1]);
        let b = encode_gf256_poly(&q).unwrap();
        assert_eq!(b.len(), 24);
        assert_eq!(decode_gf256_poly(&b).unwrap(), q);
        assert!(decode_gf256_poly(&BitString::zeros(12)).is_err());
    }
}
