//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Operand shapes are incompatible.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An argument value is outside its valid range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Least-squares fit has no unique solution (degenerate abscissae).
    #[error("singular fit: {0}")]
    SingularFit(String),

    /// Not enough data points to perform the requested analysis.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A file failed to parse; names the offending field.
    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },

    /// Checksum or record-count verification failed.
    #[error("data integrity: {0}")]
    DataIntegrity(String),

    /// Training produced a non-finite loss.
    #[error("numerical blow-up at epoch {epoch}, step {step}: {message}")]
    NumericalBlowup {
        epoch: usize,
        step: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl CoreError {
    pub fn shape(msg: impl Into<String>) -> Self {
        CoreError::ShapeMismatch(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidArgument(msg.into())
    }

    pub fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        CoreError::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
