use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular matrix")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("finite-difference step too small: derivative estimate degrades under halving")]
    StepTooSmall,
    #[error("boundaries do not form a complex: |d d| = {0:e}")]
    NotAComplex(f64),
    #[error("chain complexes of length {0} are not supported (maximum 2)")]
    LengthUnsupported(usize),
    #[error("degenerate crossed module: {0}")]
    DegenerateCrossedModule(String),
    #[error("boundary mismatch: residual {residual:e} exceeds {tol:e}")]
    BoundaryMismatch { residual: f64, tol: f64 },
    #[error("cells belong to different 2-crossed modules")]
    ModuleMismatch,
    #[error("operation not defined for cells of rank {0} and {1} in direction {2}")]
    RankMismatch(usize, usize, usize),
    #[error("unsupported form kind: {0}")]
    UnsupportedKind(String),
    #[error("map does not collapse the boundary of the cube: spread {0:e}")]
    NotASphereMap(f64),
    #[error("field constraint violated: {what} (residual {residual:e})")]
    ConstraintViolation { what: String, residual: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Alias kept for readability at call sites dealing with group structure.
pub type AlgebraError = Error;
