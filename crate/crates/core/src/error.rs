use thiserror::Error;

/// Errors raised by the library outside of certificate verification.
///
/// Certificate rejections have their own type, [`crate::witness::Reject`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the generating set is empty")]
    EmptySet,
    #[error("{0} is not representable over the generating set")]
    NotRepresentable(u64),
    #[error("the value set is independent; no dependent element exists")]
    IsIndependent,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("construction {0} does not apply to this sequence")]
    NotApplicable(String),
    #[error("unknown track `{0}`")]
    UnknownTrack(String),
    #[error("position {pos} is outside track `{track}`")]
    PositionOutOfRange { track: String, pos: u64 },
    #[error("sequence is not strictly increasing")]
    NotIncreasing,
    #[error("composition is not expressible as finitely many pieces: {0}")]
    NotAlignable(String),
    #[error("malformed function: {0}")]
    MalformedFunction(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("values and counts must be at least 1 (at {line}:{col})")]
    ZeroValue { line: usize, col: usize },
    #[error("ordinal components are limited to sizes at most aleph 0")]
    OrdinalTooLarge,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
