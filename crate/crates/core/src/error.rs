use thiserror::Error;

/// Errors produced by the simulator and its diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("velocity decomposition is undefined at the origin")]
    OriginSingularity,

    #[error("simulation diverged at t = {t}: |x| = {radius} exceeds guard radius {guard}")]
    Divergence { t: f64, radius: f64, guard: f64 },

    #[error("no unflagged tracers available for statistics")]
    EmptyStatistics,

    #[error("inconsistent diagnostics: {0}")]
    Inconsistency(String),

    #[error("config parse error on line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("invalid value for `{field}`: {message}")]
    ConfigValidation { field: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
