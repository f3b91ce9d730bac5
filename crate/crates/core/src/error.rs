use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {module}: {msg}")]
    Domain { module: &'static str, msg: String },

    #[error("pole in {module}: {msg}")]
    Pole { module: &'static str, msg: String },

    #[error("branch inconsistency in {module}: {msg}")]
    Inconsistent { module: &'static str, msg: String },

    #[error("integration path error in {module}: {msg}")]
    Path { module: &'static str, msg: String },

    #[error("degenerate system in {module}: {msg}")]
    Degenerate { module: &'static str, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("vortex boundary does not close: relative gap {gap:.3e}")]
    Closure { gap: f64 },

    #[error("stagnation point at seed {0}")]
    Stagnation(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { module, msg: msg.into() }
    }

    pub(crate) fn pole(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Pole { module, msg: msg.into() }
    }

    pub(crate) fn inconsistent(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Inconsistent { module, msg: msg.into() }
    }

    pub(crate) fn path(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Path { module, msg: msg.into() }
    }

    pub(crate) fn degenerate(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Degenerate { module, msg: msg.into() }
    }
}
