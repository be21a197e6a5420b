use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("stationary solver did not converge (residual {residual:e})")]
    Convergence { residual: f64 },

    #[error("source count {0} is outside the supported range 1..=5")]
    SourceCount(usize),

    #[error("target state {0} has zero probability")]
    UndefinedState(usize),

    #[error("partial information atom {atom} = {value:e} bit is below the consistency floor")]
    NegativeAtom { atom: String, value: f64 },

    #[error("synergy bias is undefined: {0}")]
    UndefinedBias(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("correlation is undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Errors that signal a broken numerical invariant rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::NegativeAtom { .. } | Error::Internal(_)
        )
    }
}
