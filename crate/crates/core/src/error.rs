use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has no entries")]
    Empty,

    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("frame columns are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("{operation} failed on a {rows}x{cols} matrix: {reason}")]
    Numerical {
        operation: &'static str,
        rows: usize,
        cols: usize,
        reason: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// True for failures of the numerical machinery itself, as opposed to
    /// rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }

    pub(crate) fn numerical(
        operation: &'static str,
        shape: (usize, usize),
        reason: impl Into<String>,
    ) -> Self {
        Error::Numerical {
            operation,
            rows: shape.0,
            cols: shape.1,
            reason: reason.into(),
        }
    }
}
