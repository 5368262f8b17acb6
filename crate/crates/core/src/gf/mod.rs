//! Finite-field polynomial arithmetic over GF(2) and GF(2^8).

pub mod berlekamp_massey;
pub mod gf2;
pub mod gf256;
pub mod irreducible;

pub use berlekamp_massey::{berlekamp_massey_gf2, berlekamp_massey_gf256, LinearRecurrence};
pub use gf2::{gf2_gcd, gf2_mul_mod, Gf2Poly};
pub use gf256::{gf256_gcd, gf256_mul_mod, Gf256, Gf256Poly, GF256_REDUCTION};
pub use irreducible::{
    bootstrap_irreducible_gf2, bootstrap_irreducible_gf256, count_irreducible_gf2,
    is_irreducible_gf2, is_irreducible_gf256, random_irreducible_gf2, random_irreducible_gf256,
    MAX_GENERATION_ATTEMPTS,
};

use crate::error::FormatError;

/// Tagged text form: `gf2:<degree>:<hex>` or `gf256:<degree>:<hex>`, the hex
/// holding all coefficients `0..=degree` in little-endian order.
pub fn gf2_to_tagged(p: &Gf2Poly) -> String {
    match p.degree() {
        None => "gf2:-:".to_string(),
        Some(d) => format!("gf2:{d}:{}", p.to_bits(d + 1).to_hex()),
    }
}

pub fn gf2_from_tagged(s: &str) -> Result<Gf2Poly, FormatError> {
    let (tag, degree, body) = split_tag(s)?;
    if tag != "gf2" {
        return Err(FormatError::Malformed(format!(
            "expected gf2 tag, got {tag}"
        )));
    }
    let Some(d) = degree else {
        return Ok(Gf2Poly::zero());
    };
    let bits = crate::bits::BitString::from_hex(body, d + 1)?;
    let p = Gf2Poly::from_bits(&bits);
    if p.degree() != Some(d) {
        return Err(FormatError::Malformed(
            "degree does not match coefficients".into(),
        ));
    }
    Ok(p)
}

pub fn gf256_to_tagged(p: &Gf256Poly) -> String {
    match p.degree() {
        None => "gf256:-:".to_string(),
        Some(d) => {
            let bytes: Vec<u8> = p.coeffs().iter().map(|c| c.0).collect();
            format!("gf256:{d}:{}", hex::encode(bytes))
        }
    }
}

pub fn gf256_from_tagged(s: &str) -> Result<Gf256Poly, FormatError> {
    let (tag, degree, body) = split_tag(s)?;
    if tag != "gf256" {
        return Err(FormatError::Malformed(format!(
            "expected gf256 tag, got {tag}"
        )));
    }
    let Some(d) = degree else {
        return Ok(Gf256Poly::zero());
    };
    let bytes = hex::decode(body).map_err(|e| FormatError::Hex(e.to_string()))?;
    if bytes.len() != d + 1 {
        return Err(FormatError::Length {
            expected: d + 1,
            found: bytes.len(),
        });
    }
    let p = Gf256Poly::from_bytes(&bytes);
    if p.degree() != Some(d) {
        return Err(FormatError::Malformed(
            "degree does not match coefficients".into(),
        ));
    }
    Ok(p)
}

fn split_tag(s: &str) -> Result<(&str, Option<usize>, &str), FormatError> {
    let mut parts = s.trim().splitn(3, ':');
    let (Some(tag), Some(deg), Some(body)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(FormatError::Malformed(format!(
            "not a tagged polynomial: {s}"
        )));
    };
    let degree = if deg == "-" {
        None
    } else {
        Some(
            deg.parse()
                .map_err(|_| FormatError::Malformed(format!("bad degree {deg}")))?,
        )
    };
    Ok((tag, degree, body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_roundtrip() {
        let p = Gf2Poly::from_exponents(&[70, 3, 0]);
        let s = gf2_to_tagged(&p);
        assert!(s.starts_with("gf2:70:"));
        assert_eq!(gf2_from_tagged(&s).unwrap(), p);
        assert_eq!(
            gf2_from_tagged(&gf2_to_tagged(&Gf2Poly::zero())).unwrap(),
            Gf2Poly::zero()
        );

        let q = Gf256Poly::from_bytes(&[9, 0, 0x1b, 1]);
        assert_eq!(gf256_to_tagged(&q), "gf256:3:09001b01");
        assert_eq!(gf256_from_tagged(&gf256_to_tagged(&q)).unwrap(), q);
        assert!(gf256_from_tagged("gf2:3:0b").is_err());
    }
}
