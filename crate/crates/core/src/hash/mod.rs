//! The two almost-XOR-universal hash families used for signing.

pub mod codec;
pub mod gdh;
pub mod lfsr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use codec::{decode_gf256_poly, decode_gf2_poly, encode_gf256_poly, encode_gf2_poly};
pub use gdh::{gdh_hash, GdhHasher, GdhKey};
pub use lfsr::{apply_columns, lfsr_toeplitz_hash, toeplitz_matrix_explicit, LfsrHasher, LfsrKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// LFSR-based Toeplitz hashing; three key strings per signature.
    Lfsr,
    /// Generalized division hashing over GF(2^8); two key strings.
    Gdh,
}

impl Scheme {
    pub fn strings_per_act(self) -> usize {
        match self {
            Scheme::Lfsr => 3,
            Scheme::Gdh => 2,
        }
    }

    pub fn wire_id(self) -> u8 {
        match self {
            Scheme::Lfsr => 1,
            Scheme::Gdh => 2,
        }
    }

    pub fn from_wire_id(id: u8) -> Option<Scheme> {
        match id {
            1 => Some(Scheme::Lfsr),
            2 => Some(Scheme::Gdh),
            _ => None,
        }
    }

    /// Whether `n` is a usable group size for this scheme.
    pub fn supports_n(self, n: usize) -> bool {
        match self {
            Scheme::Lfsr => n >= 2,
            Scheme::Gdh => n >= 8 && n.is_multiple_of(8),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Lfsr => "lfsr",
            Scheme::Gdh => "gdh",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lfsr" => Ok(Scheme::Lfsr),
            "gdh" => Ok(Scheme::Gdh),
            other => Err(format!("unknown scheme {other:?} (expected lfsr or gdh)")),
        }
    }
}
