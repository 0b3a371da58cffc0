use thiserror::Error;

/// Errors raised by the computations in this crate.
///
/// Verification routines that can legitimately come out negative report
/// that through their return value; `Error` is reserved for malformed
/// input, violated preconditions and inputs outside the supported scope.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid Dynkin type: {0}")]
    InvalidType(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("weight {weight} has length {found}, expected rank {rank}")]
    WeightRank {
        weight: String,
        found: usize,
        rank: usize,
    },

    #[error("weight {0} is not dominant")]
    NotDominant(String),

    #[error("degenerate q parameter {0}: q must not be 0, 1 or -1")]
    DegenerateQ(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("cocycle identity fails at ({x}, {y}, {z})")]
    NotACocycle { x: String, y: String, z: String },

    #[error("bicharacter is not alternating: {0}")]
    NotAlternating(String),

    #[error("not a bi-quasicharacter: {0}")]
    NotBiQuasicharacter(String),

    #[error("value {0} is not a root of unity")]
    NotRootOfUnity(String),

    #[error("value {0} is not a rational number")]
    NotRational(String),

    #[error("module for {ty} with highest weight {weight} has dimension {built}, Weyl formula gives {expected}")]
    DimensionMismatch {
        ty: String,
        weight: String,
        built: usize,
        expected: u128,
    },

    #[error("type {0} is outside the explicit-module whitelist (A1, A2, B2)")]
    OutsideWhitelist(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("intertwiner construction failed: {0}")]
    Intertwiner(String),

    #[error("truncation not closed: block {0} is required but absent")]
    TruncationNotClosed(String),

    #[error("block {0} is absent from the truncation")]
    BlockAbsent(String),

    #[error("block {0} is not invertible")]
    SingularBlock(String),

    #[error("witness does not normalize the tau blocks: {0}")]
    TauNotNormalized(String),

    #[error("input too large: {0}")]
    TooLarge(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
