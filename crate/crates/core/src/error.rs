use thiserror::Error;

/// Which edge of the simulation window was compromised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid initial pattern: {0}")]
    InvalidPattern(String),
    #[error("configuration has no front (no zero in the window)")]
    NoFront,
    #[error("simulation window too small: {side:?} edge compromised at t={time}")]
    WindowTooSmall { side: Side, time: f64 },
    #[error("window does not cover sites [{lo}, {hi}]")]
    WindowDoesNotCover { lo: i64, hi: i64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("order violation at site {site}, t={time}")]
    OrderViolation { site: i64, time: f64 },
    #[error("not enough samples: need {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("degenerate samples: {0}")]
    Degenerate(String),
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("volume of {0} sites exceeds the exact-enumeration cap")]
    OversizeVolume(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
