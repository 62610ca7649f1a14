use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed operator: {0}")]
    MalformedOperator(String),

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("spin-inversion closure requires N_alpha == N_beta (got {n_alpha}, {n_beta})")]
    UnbalancedSpin { n_alpha: usize, n_beta: usize },

    #[error("sector enumeration of {size} configurations exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("FCIDUMP parse error at line {line}: {msg}")]
    Fcidump { line: usize, msg: String },

    #[error("samples parse error at line {line}: {msg}")]
    Samples { line: usize, msg: String },

    #[error("curve data error: {0}")]
    Curve(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty basis")]
    EmptyBasis,

    #[error("state is not normalized (norm^2 = {0})")]
    Unnormalized(f64),

    #[error("overlap matrix has eigenvalue {value:e} below -tau*max ({bound:e})")]
    InvalidOverlap { value: f64, bound: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("state file error: {0}")]
    StateFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
