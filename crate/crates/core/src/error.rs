use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("perimeter must be positive")]
    NonPositivePerimeter,

    #[error("radius must be positive and strictly less than half the perimeter (2r < p)")]
    RadiusTooLarge,

    #[error("point {0} lies farther than the confidence radius from the centre")]
    OutOfRadius(String),

    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("configuration must contain at least one agent")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("configurations are not comparable: {0}")]
    Mismatch(String),

    #[error("agents are not in anti-clockwise cyclic order")]
    NotCyclicallyOrdered,

    #[error("influence graph is disconnected")]
    Disconnected,

    #[error("zero vector")]
    ZeroVector,

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("scenario validation failed: {0}")]
    Validation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),
}
