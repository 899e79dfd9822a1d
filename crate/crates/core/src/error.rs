use thiserror::Error;

/// Errors raised across the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("mode {mode} out of range for an order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("rank {rank} out of range (must be in 1..={max})")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("matrix does not conform to the block pattern: {0}")]
    PatternMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("block pattern is not closed under transposition: {0}")]
    TransposeClosure(String),

    #[error("dense result of {rows}x{cols} exceeds the {limit} entry guard")]
    SizeGuard { rows: usize, cols: usize, limit: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported container version {0}")]
    Version(String),

    #[error("container extent inconsistency: {0}")]
    ExtentInconsistency(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the failure class (parse=2, dimension=3, numerical=4).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Version(_) | Error::ExtentInconsistency(_) => 2,
            Error::ShapeMismatch(_)
            | Error::ModeOutOfRange { .. }
            | Error::RankOutOfRange { .. }
            | Error::PatternMismatch(_)
            | Error::SizeGuard { .. }
            | Error::TransposeClosure(_)
            | Error::InvalidArgument(_) => 3,
            Error::NotPositiveDefinite { .. }
            | Error::NoConvergence(_)
            | Error::Asymmetric(_)
            | Error::Degenerate(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::ShapeMismatch(msg.into()))
}
