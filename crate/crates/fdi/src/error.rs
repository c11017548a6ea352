use thiserror::Error;

/// Errors from classification and metric computations.
#[derive(Debug, Error)]
pub enum FdiError {
    /// A trajectory window was requested that the trajectory cannot supply.
    #[error("classification window of {window} steps needs a trajectory of at least that length, got {len}")]
    EmptyWindow { window: usize, len: usize },

    /// Truth and estimate trajectories must be sampled on the same steps.
    #[error("trajectory length mismatch: truth has {truth} steps, estimate has {estimate}")]
    LengthMismatch { truth: usize, estimate: usize },

    /// The burn-in must leave at least one step to evaluate.
    #[error("burn-in of {burn_in} steps leaves nothing of a {len}-step trajectory")]
    BurnInTooLong { burn_in: usize, len: usize },

    /// A value that must be finite was NaN or infinite.
    #[error("{what} is not finite")]
    NotFinite { what: &'static str },

    /// Relative improvement is undefined against a non-positive baseline.
    #[error("improvement is undefined against non-positive baseline RMSE {baseline}")]
    NonPositiveBaseline { baseline: f64 },
}
