use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    Length { expected: usize, found: usize },
    #[error("malformed input: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no degree-{degree} minimal polynomial after {attempts} attempts")]
    GenerationFailed { degree: usize, attempts: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HashError {
    #[error("message must contain at least one bit")]
    EmptyMessage,
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("explicit matrix of {bits} bits exceeds the {limit}-bit limit")]
    TooLarge { bits: u128, limit: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("not enough key material: need {needed} bits, have {available}")]
    KeyExhausted { needed: usize, available: usize },
    #[error("key group {act} was already consumed")]
    OneTimeViolation { act: usize },
    #[error("no key group with index {act}")]
    NoSuchGroup { act: usize },
    #[error("role mismatch: {0}")]
    Role(String),
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error("transport failure: {0}")]
    Transport(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KgpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PostprocError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("error correction failed after {passes} passes with {residual} residual mismatches")]
    CorrectionFailed { passes: usize, residual: usize },
}
