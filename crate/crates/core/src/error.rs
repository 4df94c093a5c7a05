use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular matrix: smallest singular value {sigma_min:.3e} at or below floor {floor:.3e}")]
    Singular { sigma_min: f64, floor: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("malformed input: {0}")]
    Parse(String),
}
