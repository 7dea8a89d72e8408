use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice dimensions must be even, got {m}x{n}")]
    OddDimension { m: usize, n: usize },
    #[error("lattice dimensions must be at least 2, got {m}x{n}")]
    TooSmall { m: usize, n: usize },
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitCountMismatch(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{n} qubits exceeds the limit of {limit} for this operation")]
    TooManyQubits { n: usize, limit: usize },
    #[error("cannot build a rotation from the identity string")]
    EmptyString,
    #[error("expected {expected} parameters, got {got}")]
    BadParameterCount { expected: usize, got: usize },
    #[error("Krylov evolution did not reach tolerance: {0}")]
    ConvergenceFailure(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
