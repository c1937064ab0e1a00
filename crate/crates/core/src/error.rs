use thiserror::Error;

/// Errors produced by the geometry, solver and reporting layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("structure constants are not antisymmetric at ({i}, {j}, {k})")]
    NotAntisymmetric { i: usize, j: usize, k: usize },

    #[error("Jacobi identity violated on basis triple ({i}, {j}, {k}): residual {residual:e}")]
    JacobiViolation {
        i: usize,
        j: usize,
        k: usize,
        residual: f64,
    },

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("alpha is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("Randers condition violated: alpha(V, V) = {0} is not < 1")]
    RandersBound(f64),

    #[error("the zero vector has no direction")]
    ZeroVector,

    #[error("vector lies on the Killing null cone: |K(x, x)| = {value:e} <= {tol:e}")]
    NullCone { value: f64, tol: f64 },

    #[error("invalid reductive decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("unsupported decomposition: {0}")]
    UnsupportedDecomposition(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("wrong case: {0}")]
    WrongCase(String),

    #[error("invalid hyperplane: {0}")]
    InvalidHyperplane(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolveConfig(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
