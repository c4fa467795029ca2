use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector norm {0:e} is too small to project onto the sphere")]
    ZeroNorm(f64),
    #[error("spherical angle {index} = {value} is outside its range")]
    AngleOutOfRange { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric (max |D - D^T| = {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("transform is singular or ill-conditioned (condition estimate {0:e})")]
    SingularTransform(f64),
    #[error("largest |eigenvalue| {0} exceeds the exp overflow guard of 700")]
    KernelOverflow(f64),
    #[error("invalid weights: {0}")]
    BadWeights(String),
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("particle index {index} out of range for {len} particles")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("eigenvectors {0} and {1} are not orthogonal")]
    NotOrthogonal(usize, usize),
    #[error("eigenvalues must be positive, got ({0}, {1})")]
    NonPositiveEigenvalue(f64, f64),
    #[error("dimension {0} is not supported here (only n = 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("first-order density has negative mass {0:e}; eps is too large")]
    NegativeMass(f64),
    #[error("non-finite result: {0}")]
    NonFinite(String),
    #[error("flow step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::ZeroNorm(_) | Error::KernelOverflow(_) | Error::NegativeMass(_) | Error::NonFinite(_) => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
