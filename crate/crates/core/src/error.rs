use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("vector {index} has a non-finite coordinate")]
    NonFinite { index: usize },

    #[error("vector {index} is zero")]
    ZeroVector { index: usize },

    #[error("frame does not span R^{dim} (numerical rank {rank})")]
    NotSpanning { dim: usize, rank: usize },

    #[error("matrix is not orthogonal: ||U^T U - I||_F = {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("not an orthogonal projection: {0}")]
    InvalidProjection(String),

    #[error("projection rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A constructor or checker was called on data outside its hypotheses.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// Two algebraically equal routes disagreed beyond tolerance. This points
    /// at a numerical bug, not at a property of the frame.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
