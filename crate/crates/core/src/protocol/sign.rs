//! Alice's signing step and the receivers' verification.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::ProtocolError;
use crate::gf::{is_irreducible_gf2, is_irreducible_gf256, random_irreducible_gf2, random_irreducible_gf256};
use crate::hash::{
    decode_gf256_poly, decode_gf2_poly, encode_gf256_poly, encode_gf2_poly, gdh_hash,
    lfsr_toeplitz_hash, GdhKey, LfsrKey, Scheme,
};

use super::keys::{KeyAct, KeyGroups, Role};
use super::packet::{PacketHeader, SignaturePacket};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    DigestMismatch,
    Reducible,
    Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("accept"),
            Verdict::Reject(RejectReason::DigestMismatch) => f.write_str("reject:digest-mismatch"),
            Verdict::Reject(RejectReason::Reducible) => f.write_str("reject:reducible-polynomial"),
            Verdict::Reject(RejectReason::Format) => f.write_str("reject:format"),
        }
    }
}

/// Signs with an explicit act, consuming it.
pub fn alice_sign<R: RngCore + ?Sized>(
    message: &BitString,
    groups: &mut KeyGroups,
    act: usize,
    rng: &mut R,
) -> Result<SignaturePacket, ProtocolError> {
    if groups.role() != Role::Alice {
        return Err(ProtocolError::Role(format!(
            "only alice signs, got {} keys",
            groups.role()
        )));
    }
    let keys = groups.consume(act)?;
    sign_with_act(message, &keys, rng)
}

/// Signs with an already-taken act; the caller is responsible for
/// one-time use.
pub fn sign_with_act<R: RngCore + ?Sized>(
    message: &BitString,
    keys: &KeyAct,
    rng: &mut R,
) -> Result<SignaturePacket, ProtocolError> {
    let n = keys.n;
    let header = PacketHeader {
        scheme: keys.scheme,
        n: u32::try_from(n).map_err(|_| ProtocolError::Inconsistent("n too large".into()))?,
        message_bits: message.len() as u64,
    };
    let mut packet = SignaturePacket {
        header,
        sig: BitString::zeros(n),
        p: BitString::zeros(n),
        message: message.clone(),
    };
    let payload = packet.signed_payload();
    match keys.scheme {
        Scheme::Lfsr => {
            let poly = random_irreducible_gf2(n, rng)?;
            let key = LfsrKey::from_parts_unchecked(poly.clone(), keys.y().clone())?;
            let dig = lfsr_toeplitz_hash(&key, &payload)?;
            let z = keys.z().expect("lfsr acts carry three strings");
            packet.sig = dig.xor(z);
            packet.p = encode_gf2_poly(&poly)?.xor(keys.x());
        }
        Scheme::Gdh => {
            let poly = random_irreducible_gf256(n / 8, rng)?;
            let key = GdhKey::from_poly_unchecked(poly.clone())?;
            let dig = gdh_hash(&key, &payload);
            packet.sig = dig.xor(keys.y());
            packet.p = encode_gf256_poly(&poly)?.xor(keys.x());
        }
    }
    Ok(packet)
}

/// Verification from the combined strings `K = own xor received`. Pure and
/// role-independent: the same packet and `K` give the same verdict.
pub fn verify_with_combined(packet: &SignaturePacket, scheme: Scheme, k: &[BitString]) -> Verdict {
    let n = packet.header.n as usize;
    if packet.header.scheme != scheme
        || packet.check_shape().is_err()
        || k.len() != scheme.strings_per_act()
        || k.iter().any(|s| s.len() != n)
    {
        return Verdict::Reject(RejectReason::Format);
    }
    let payload = packet.signed_payload();
    let poly_bits = packet.p.xor(&k[0]);
    let (actual, expected) = match scheme {
        Scheme::Lfsr => {
            let Ok(poly) = decode_gf2_poly(&poly_bits) else {
                return Verdict::Reject(RejectReason::Format);
            };
            if !is_irreducible_gf2(&poly).unwrap_or(false) {
                return Verdict::Reject(RejectReason::Reducible);
            }
            let Ok(key) = LfsrKey::from_parts_unchecked(poly, k[1].clone()) else {
                return Verdict::Reject(RejectReason::Format);
            };
            let Ok(d) = lfsr_toeplitz_hash(&key, &payload) else {
                return Verdict::Reject(RejectReason::Format);
            };
            (d, packet.sig.xor(&k[2]))
        }
        Scheme::Gdh => {
            let Ok(poly) = decode_gf256_poly(&poly_bits) else {
                return Verdict::Reject(RejectReason::Format);
            };
            if !is_irreducible_gf256(&poly).unwrap_or(false) {
                return Verdict::Reject(RejectReason::Reducible);
            }
            let Ok(key) = GdhKey::from_poly_unchecked(poly) else {
                return Verdict::Reject(RejectReason::Format);
            };
            (gdh_hash(&key, &payload), packet.sig.xor(&k[1]))
        }
    };
    if actual == expected {
        Verdict::Accept
    } else {
        Verdict::Reject(RejectReason::DigestMismatch)
    }
}

/// A receiver's check using its own act and the one received from the
/// other receiver.
pub fn receiver_verify(
    packet: &SignaturePacket,
    own: &KeyAct,
    received: &KeyAct,
) -> Result<Verdict, ProtocolError> {
    if own.role == Role::Alice || received.role == Role::Alice || own.role == received.role {
        return Err(ProtocolError::Role(format!(
            "verification needs bob and charlie shares, got {} and {}",
            own.role, received.role
        )));
    }
    let Ok(k) = own.combine(received) else {
        return Ok(Verdict::Reject(RejectReason::Format));
    };
    Ok(verify_with_combined(packet, own.scheme, &k))
}
