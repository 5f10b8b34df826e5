use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid noise spec: {0}")]
    InvalidNoise(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {actual})")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("shape mismatch: {expected:?} vs {actual:?}")]
    Shape {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid detector config: {0}")]
    InvalidDetector(String),

    #[error("invalid experiment config: {0}")]
    InvalidExperiment(String),

    #[error("change magnitude is undefined at k = 0")]
    ChangeAtOrigin,

    #[error("trajectory too short: {steps} steps, need at least {required}")]
    TrajectoryTooShort { steps: usize, required: usize },

    #[error("figure data requires reports with matching windows and horizons")]
    MismatchedReports,

    #[error("malformed trajectory csv: {0}")]
    TrajectoryCsv(String),

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
