use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-positive frequency {value} cm-1 at mode {index}")]
    NonPositiveFrequency { index: usize, value: f64 },

    #[error(
        "coupling matrix of mode {mode} is not Hermitian (max |V_ba - conj(V_ab)| = {deviation:e})"
    )]
    NonHermitian { mode: usize, deviation: f64 },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by user input rather than by a numerical or
    /// internal failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}
