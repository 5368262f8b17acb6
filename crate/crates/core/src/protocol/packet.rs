//! Signature packets and their wire format.
//!
//! Wire layout, big-endian: header (1 byte scheme, 4 bytes n, 8 bytes
//! message bit length), then sig, p and message, each as a 4-byte byte
//! count followed by the bytes.

use crate::bits::BitString;
use crate::error::FormatError;
use crate::hash::Scheme;

pub const HEADER_BYTES: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PacketHeader {
    pub scheme: Scheme,
    pub n: u32,
    pub message_bits: u64,
}

impl PacketHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_BYTES] {
        let mut out = [0u8; HEADER_BYTES];
        out[0] = self.scheme.wire_id();
        out[1..5].copy_from_slice(&self.n.to_be_bytes());
        out[5..13].copy_from_slice(&self.message_bits.to_be_bytes());
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, FormatError> {
        if b.len() < HEADER_BYTES {
            return Err(FormatError::Length {
                expected: HEADER_BYTES,
                found: b.len(),
            });
        }
        let scheme = Scheme::from_wire_id(b[0])
            .ok_or_else(|| FormatError::Malformed(format!("unknown scheme id {}", b[0])))?;
        let n = u32::from_be_bytes(b[1..5].try_into().expect("4 bytes"));
        let message_bits = u64::from_be_bytes(b[5..13].try_into().expect("8 bytes"));
        Ok(Self {
            scheme,
            n,
            message_bits,
        })
    }
}

/// `{Sig, p, M}` with the header that is signed along with `M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignaturePacket {
    pub header: PacketHeader,
    pub sig: BitString,
    pub p: BitString,
    pub message: BitString,
}

impl SignaturePacket {
    /// The hashed input: header bytes followed by the message bits.
    pub fn signed_payload(&self) -> BitString {
        signed_payload(&self.header, &self.message)
    }

    /// Lengths agree with the header.
    pub fn check_shape(&self) -> Result<(), FormatError> {
        let n = self.header.n as usize;
        if self.sig.len() != n {
            return Err(FormatError::Length {
                expected: n,
                found: self.sig.len(),
            });
        }
        if self.p.len() != n {
            return Err(FormatError::Length {
                expected: n,
                found: self.p.len(),
            });
        }
        if self.message.len() as u64 != self.header.message_bits {
            return Err(FormatError::Length {
                expected: self.header.message_bits as usize,
                found: self.message.len(),
            });
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header.to_bytes().to_vec();
        for part in [&self.sig, &self.p, &self.message] {
            let bytes = part.to_bytes();
            out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, FormatError> {
        let header = PacketHeader::from_bytes(b)?;
        let n = header.n as usize;
        let mut rest = &b[HEADER_BYTES..];
        let mut take = |bits: usize| -> Result<BitString, FormatError> {
            if rest.len() < 4 {
                return Err(FormatError::Malformed("truncated length prefix".into()));
            }
            let len = u32::from_be_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
            rest = &rest[4..];
            if len != bits.div_ceil(8) || rest.len() < len {
                return Err(FormatError::Length {
                    expected: bits.div_ceil(8),
                    found: len.min(rest.len()),
                });
            }
            let s = BitString::from_bytes_with_len(&rest[..len], bits);
            if s.to_bytes() != rest[..len] {
                return Err(FormatError::Malformed("nonzero padding bits".into()));
            }
            rest = &rest[len..];
            Ok(s)
        };
        let message_bits = usize::try_from(header.message_bits)
            .map_err(|_| FormatError::Malformed("message too long".into()))?;
        let sig = take(n)?;
        let p = take(n)?;
        let message = take(message_bits)?;
        if !rest.is_empty() {
            return Err(FormatError::Malformed("trailing bytes".into()));
        }
        Ok(Self {
            header,
            sig,
            p,
            message,
        })
    }
}

pub fn signed_payload(header: &PacketHeader, message: &BitString) -> BitString {
    let mut payload = BitString::from_bytes(&header.to_bytes());
    payload.extend_from(message);
    payload
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn packet() -> SignaturePacket {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        SignaturePacket {
            header: PacketHeader {
                scheme: Scheme::Lfsr,
                n: 20,
                message_bits: 37,
            },
            sig: BitString::random(20, &mut rng),
            p: BitString::random(20, &mut rng),
            message: BitString::random(37, &mut rng),
        }
    }

    #[test]
    fn wire_roundtrip() {
        let p = packet();
        let bytes = p.to_bytes();
        assert_eq!(&bytes[..5], &[1, 0, 0, 0, 20]);
        assert_eq!(SignaturePacket::from_bytes(&bytes).unwrap(), p);
    }

    #[test]
    fn truncation_and_trailing_bytes_are_rejected() {
        let bytes = packet().to_bytes();
        assert!(SignaturePacket::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(SignaturePacket::from_bytes(&longer).is_err());
        assert!(SignaturePacket::from_bytes(&bytes[..7]).is_err());
    }

    #[test]
    fn payload_starts_with_header() {
        let p = packet();
        let payload = p.signed_payload();
        assert_eq!(payload.len(), 8 * HEADER_BYTES + 37);
        assert_eq!(payload.slice(8 * HEADER_BYTES, 37), p.message);
    }
}
