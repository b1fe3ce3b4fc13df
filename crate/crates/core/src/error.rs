use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("matrix is exactly singular")]
    Singular,

    #[error("dual block determinant vanishes")]
    SingularDual,

    #[error("log-mean-exp of an empty stream")]
    EmptyStream,

    #[error("{count} of {total} samples were singular (limit 0.1%)")]
    TooManySingular { count: usize, total: usize },

    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error("grid under-resolved: eigenvalue shift {shift:.3e} under node doubling")]
    UnderResolved { shift: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("kernel value overflows; use the log-kernel")]
    Overflow,

    #[error("kernel is not real (imaginary part {0:.3e})")]
    NotReal(f64),

    #[error("effective model truncation did not settle below level {0}")]
    Truncation(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid { field, reason: reason.into() }
}
