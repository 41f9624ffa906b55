use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid vertex index {index} (graph has {count} vertices)")]
    InvalidVertex { index: usize, count: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("region must be non-empty")]
    EmptyRegion,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid Hamiltonian term: {0}")]
    InvalidTerm(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid factor index {index} ({count} factors)")]
    InvalidFactor { index: usize, count: usize },
    #[error("invalid Lieb-Robinson parameters: {0}")]
    InvalidLrParams(String),
    #[error("envelope {expected} evaluated with {actual} parameters")]
    WrongKind { expected: &'static str, actual: &'static str },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("map is not completely positive (Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),
    #[error("map is not trace preserving (marginal deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("SDP infeasible: {0}")]
    Infeasible(String),
    #[error("SDP did not converge after {iterations} iterations (gap {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64 },
    #[error("invalid SDP: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
