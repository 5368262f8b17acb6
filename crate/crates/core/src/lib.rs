//! One-time universal hashing digital signatures with imperfectly secret
//! keys: finite-field machinery, the two hash families, the three-party
//! messaging protocol, security bounds, key-generation rate simulators and
//! classical postprocessing.

pub mod bits;
pub mod bounds;
pub mod error;
pub mod gf;
pub mod hash;
pub mod kgp;
pub mod par;
pub mod postproc;
pub mod protocol;

pub use bits::BitString;
pub use par::ExecMode;
