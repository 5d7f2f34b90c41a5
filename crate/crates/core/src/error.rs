use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("factor index {index} out of range for a layout with {len} factors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("total dimension {dim} exceeds the dense cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state is not pure (largest eigenvalue {0})")]
    NotPure(f64),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("locality violation: {0}")]
    Locality(String),

    #[error("not convertible: partial sum {index} fails ({target_sum} < {source_sum})")]
    NotConvertible {
        index: usize,
        target_sum: f64,
        source_sum: f64,
    },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("divergent: {0}")]
    Divergent(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not distillable by the recurrence protocol: {0}")]
    NotDistillable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
