use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field length {actual} does not match grid size {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("imaginary residue {residue:e} exceeds tolerance {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("non-finite value encountered{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    NonFinite { step: Option<usize> },

    #[error("quadrature did not converge: estimate {estimate:e}, requested {requested:e}")]
    NotConverged { estimate: f64, requested: f64 },

    #[error("singular conservation Gram matrix")]
    SingularGram,

    #[error("multistep history has {have} entries, need {need}")]
    InsufficientHistory { have: usize, need: usize },

    #[error("tolerance {tol:e} unreachable for g_tr <= {g_max}")]
    Unreachable { tol: f64, g_max: f64 },

    #[error("field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
