//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("scenario validation failed:\n{}", .0.join("\n"))]
    Scenario(Vec<String>),

    #[error("CFL violation: dt = {dt:.3e} exceeds dt_max = {dt_max:.3e}")]
    CflViolation { dt: f64, dt_max: f64 },

    #[error("invariant `{name}` breached at t = {time:.6}: value {value:.3e} exceeds tolerance {tolerance:.3e} (node {node:?})")]
    InvariantBreach {
        name: &'static str,
        value: f64,
        tolerance: f64,
        time: f64,
        node: Option<usize>,
    },

    #[error("run aborted at t = {time:.6}: {reason}")]
    Aborted { time: f64, reason: String },

    #[error("point {0:.6} outside the tracked range")]
    OutOfRange(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
