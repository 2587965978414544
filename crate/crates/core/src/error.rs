use thiserror::Error;

use crate::network::{EdgeId, PathId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),

    #[error("unknown path {0}")]
    UnknownPath(PathId),

    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),

    #[error("group size {ell} out of range [1, {max}]")]
    GroupSizeOutOfRange { ell: usize, max: usize },

    #[error("oracle instance has {paths} paths, above the cap of {cap}; raise the cap to run it")]
    OracleCapExceeded { paths: usize, cap: usize },

    #[error("round count c = {c} out of range [0, {max}]")]
    RoundsOutOfRange { c: usize, max: usize },

    #[error("N = {n} evaluation points need a field with more than {n} nonzero elements, {field} has {available}; use a larger field")]
    FieldTooSmall {
        n: usize,
        field: String,
        available: usize,
    },

    #[error("unsupported field {0:?}; expected gf256 or gf<prime>")]
    UnknownField(String),

    #[error("invalid code dimensions: {0}")]
    InvalidDimensions(String),

    #[error("payload length mismatch: expected {expected}, got {got}")]
    PayloadMismatch { expected: usize, got: usize },

    #[error("missing packet T{0}")]
    MissingPacket(usize),

    #[error("key submatrix is singular")]
    SingularMatrix,

    #[error("adversary sweep needs {needed} evaluations, above the cap of {cap}")]
    SweepCapExceeded { needed: u128, cap: u128 },

    #[error("transcript schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),
}

pub type Result<T> = std::result::Result<T, Error>;
