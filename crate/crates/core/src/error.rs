use std::path::PathBuf;

/// Errors produced by the simulator and the analytic calculator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no relays configured")]
    NoRelays,

    #[error(
        "event enumeration supports at most {max} relays, got {got}; use the Monte Carlo path"
    )]
    TooManyRelays { got: usize, max: usize },

    #[error(
        "relay {relay} event {event} has probability {probability:.3e} below the rejection-sampling floor {floor:.0e}"
    )]
    RareEvent {
        relay: usize,
        event: &'static str,
        probability: f64,
        floor: f64,
    },

    #[error("need at least {needed} usable points in the fit window, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects non-finite or non-positive values.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}
