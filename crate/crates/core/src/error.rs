use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Lyapunov operator L_A is not invertible (an eigenvalue pair sums to ~0)")]
    NotInvertible,

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("vector of length {0} is not a packed symmetric matrix (m(m+1)/2)")]
    BadLength(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Y and Lambda do not satisfy Y∘Lambda = 0 (residual {0:e})")]
    NotCommuting(f64),

    #[error(
        "strict complementarity fails: rank G(x) = {rank_g}, rank Lambda = {rank_lambda}, m = {m}"
    )]
    StrictComplementarityRequired {
        rank_g: usize,
        rank_lambda: usize,
        m: usize,
    },

    #[error("point is not a KKT point at tolerance {tol:e} (worst residual {residual:e})")]
    NotKkt { tol: f64, residual: f64 },

    #[error("iteration limit of {0} reached")]
    MaxIterations(usize),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
