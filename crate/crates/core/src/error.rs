use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("assumption '{assumption}' violated: {detail}")]
    AssumptionViolation { assumption: String, detail: String },

    #[error("Newton inversion of the jump map did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("maximum principle violated: kappa*|u| = {lhs:e} > (1+tol)*|f| = {rhs:e}")]
    MaximumPrinciple { lhs: f64, rhs: f64 },

    #[error("residual {residual:e} above tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("path aborted at t={time}: {detail}")]
    PathAborted { time: f64, detail: String },

    #[error("memory cap exceeded: {0}")]
    Budget(String),

    #[error("provenance: {0}")]
    Provenance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::AssumptionViolation { .. } => "assumption_violation",
            Error::NewtonFailed { .. } => "newton_failed",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::SolveFailed(_) => "solve_failed",
            Error::MaximumPrinciple { .. } => "maximum_principle",
            Error::Residual { .. } => "residual",
            Error::PathAborted { .. } => "path_aborted",
            Error::Budget(_) => "budget",
            Error::Provenance(_) => "provenance",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
