use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: parameters, profiles, intervals.
    Config,
    /// The numerics failed: integration, root finding.
    Numeric,
    /// A design or physical precondition does not hold.
    Validation,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tau = {tau} lies outside the profile domain [{start}, {end}]")]
    Domain { tau: f64, start: f64, end: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("matrix is not symplectic: det = {det}")]
    NotSymplectic { det: f64 },

    #[error("matrix {index} is not equidiagonal: |u11 - u22| = {gap}")]
    NotEquidiagonal { index: usize, gap: f64 },

    #[error("profile is not symmetric about 0: beta({tau}) and beta(-{tau}) differ by {gap}")]
    NotSymmetric { tau: f64, gap: f64 },

    #[error("profile is not periodic with period {period}: mismatch {gap} at tau = {tau}")]
    NotPeriodic { period: f64, tau: f64, gap: f64 },

    #[error("determinant drift: |det - 1| = {drift} exceeds {tolerance}")]
    DeterminantDrift { drift: f64, tolerance: f64 },

    #[error("integration failed at tau = {tau}: {reason}")]
    Integration { tau: f64, reason: String },

    #[error("beta is singular at tau = {tau}: theta = 0 with theta' = {slope} (needs +-2)")]
    Singular { tau: f64, slope: f64 },

    #[error(
        "no convergence from (beta0, beta1) = ({beta0}, {beta1}), residual {residual}: {reason}"
    )]
    NoConvergence {
        beta0: f64,
        beta1: f64,
        residual: f64,
        reason: String,
    },

    #[error("pulse stages do not join continuously at tau = {tau}: beta jumps by {jump}")]
    Discontinuous { tau: f64, jump: f64 },

    #[error("undefined ratio: {0}")]
    Undefined(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_)
            | Error::Domain { .. }
            | Error::InvalidProfile(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => ErrorKind::Config,
            Error::DeterminantDrift { .. }
            | Error::Integration { .. }
            | Error::NoConvergence { .. }
            | Error::Undefined(_) => ErrorKind::Numeric,
            Error::NotSymplectic { .. }
            | Error::NotEquidiagonal { .. }
            | Error::NotSymmetric { .. }
            | Error::NotPeriodic { .. }
            | Error::Singular { .. }
            | Error::Discontinuous { .. } => ErrorKind::Validation,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
