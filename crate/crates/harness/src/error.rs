use std::path::PathBuf;

use gasgen_estimator::EstimatorError;
use gasgen_fdi::FdiError;
use gasgen_model::ModelError;
use gasgen_plant::PlantError;
use serde::Serialize;
use thiserror::Error;

/// Errors surfaced by the experiment harness.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// The scenario configuration is unusable as written.
    #[error("configuration: {message}")]
    Config { message: String },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Estimator(#[from] EstimatorError),

    #[error(transparent)]
    Plant(#[from] PlantError),

    #[error(transparent)]
    Fdi(#[from] FdiError),

    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    /// More simulated runs failed than the sweep tolerates.
    #[error("{failed} of {total} runs failed (first failure: {first})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: String,
    },

    /// A retained-runs directory is missing pieces the report needs.
    #[error("retained runs at {path}: {message}")]
    BadRunsDir { path: PathBuf, message: String },
}

impl HarnessError {
    /// Process exit code for this error: `2` for configuration and
    /// validation problems (the invocation was never viable), `3` for
    /// runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } | HarnessError::Model(_) => 2,
            _ => 3,
        }
    }

    /// Machine-readable form, printed to stderr by the CLI.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            error: WireBody<'a>,
        }
        #[derive(Serialize)]
        struct WireBody<'a> {
            kind: &'a str,
            message: String,
            exit_code: i32,
        }
        let kind = match self {
            HarnessError::Config { .. } => "config",
            HarnessError::Model(_) => "model",
            HarnessError::Estimator(_) => "estimator",
            HarnessError::Plant(_) => "plant",
            HarnessError::Fdi(_) => "fdi",
            HarnessError::Io { .. } => "io",
            HarnessError::Json(_) => "json",
            HarnessError::Csv(_) => "csv",
            HarnessError::TooManyFailures { .. } => "too-many-failures",
            HarnessError::BadRunsDir { .. } => "bad-runs-dir",
        };
        let wire = Wire {
            error: WireBody {
                kind,
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        };
        serde_json::to_string(&wire).unwrap_or_else(|_| {
            format!("{{\"error\":{{\"kind\":\"{kind}\",\"message\":\"unprintable\"}}}}")
        })
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
