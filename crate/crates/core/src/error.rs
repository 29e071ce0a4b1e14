use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },
    #[error("zero-norm vector at column {col}")]
    ZeroNorm { col: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("t={0} is outside the evaluable interior range for a standard-form derivative")]
    EndpointT(f64),
    #[error("lifting exponent c3 is required but not set on the instance")]
    MissingC3,
    #[error("numeric overflow: {0}")]
    Overflow(String),
    #[error("quadrature budget exceeded: total Gaussian dimension {dim} > {max}")]
    DimensionBudget { dim: usize, max: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("non-finite output value: {0}")]
    NonFiniteOutput(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by unreadable or malformed input data, as
    /// opposed to invalid parameters or internal numeric failures.
    pub fn is_input_data(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::ZeroNorm { .. }
                | Error::NonFinite { .. }
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}
