use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("gate position {index} out of range (circuit has {len} gates)")]
    GateIndexOutOfRange { index: usize, len: usize },

    #[error("two-qubit gate acts twice on qubit {0}")]
    RepeatedQubit(usize),

    #[error("circuit has no wait marker")]
    MissingWaitMarker,

    #[error("invalid adjacency triple: {0}")]
    InvalidTriple(String),

    #[error("unsupported gate {0} in this context")]
    UnsupportedGate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
