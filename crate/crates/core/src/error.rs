use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("coupling must be positive, got {0}")]
    NonPositiveCoupling(f64),
    #[error("degree {n} exceeds the supported cap {cap}")]
    DegreeTooLarge { n: usize, cap: usize },
    #[error("matrix size {dim} is smaller than the degree {n}; the Gram matrix is singular")]
    MatrixTooSmall { dim: usize, n: usize },
    #[error("index {index} out of range for matrix size {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("index pattern is malformed: {0}")]
    MalformedPattern(String),
    #[error("enumeration guard exceeded: {0}")]
    TooExpensive(String),
    #[error("not enough samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed config dump: {0}")]
    Format(String),
}
