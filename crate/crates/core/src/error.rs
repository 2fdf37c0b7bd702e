use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A lift or a radius left the single-chart regime (torus distance must stay below 1/4).
    #[error("chart guard violated: {0}")]
    ChartGuard(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("rejection sampling acceptance {0:.3e} below 1e-6")]
    LowAcceptance(f64),

    #[error("no sign change on [{lo}, {hi}] (residuals {res_lo:.3e}, {res_hi:.3e})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        res_lo: f64,
        res_hi: f64,
    },

    #[error("missing constant for key {0}")]
    MissingConstant(String),

    #[error("too few records: need at least {need}, got {got}")]
    TooFewRecords { need: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn chart(msg: impl Into<String>) -> Self {
        Error::ChartGuard(msg.into())
    }

    /// True for errors caused by bad user input rather than I/O or numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::ChartGuard(_)
                | Error::InvalidArgument(_)
                | Error::Empty(_)
                | Error::MissingConstant(_)
                | Error::TooFewRecords { .. }
                | Error::Parse(_)
        )
    }
}
