use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A row or value failed validation. `row` is 1-based over data rows when known.
    #[error("validation error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Validation { row: Option<usize>, message: String },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown functional `{0}`")]
    UnknownFunctional(String),

    #[error("estimating equation has no sign change on {lo}..{hi}")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("estimating equation has zero denominator")]
    ZeroDenominator,

    #[error("division by zero at observation {index}")]
    DivisionByZero { index: usize },

    #[error("influence values are one-signed; constraint is infeasible")]
    InfeasibleConstraint,

    #[error("score vector has zero variance")]
    ZeroVariance,

    #[error("quadrature did not reach tolerance (estimate {estimate}, error {error})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("integral appears divergent")]
    DivergentIntegral,

    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(row: Option<usize>, message: impl Into<String>) -> Self {
        Error::Validation {
            row,
            message: message.into(),
        }
    }

    /// True for data and configuration problems, false for numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::DegenerateSample(_)
                | Error::InvalidParameter(_)
                | Error::UnknownFunctional(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
