use thiserror::Error;

/// Failures raised by the estimator operations.
#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Model(#[from] gasgen_model::ModelError),

    #[error("belief dimension mismatch: mean has {mean_len}, covariance is {cov_rows}x{cov_cols}, model expects {expected}")]
    BeliefDimensionMismatch {
        mean_len: usize,
        cov_rows: usize,
        cov_cols: usize,
        expected: usize,
    },

    #[error("belief covariance asymmetric: {asymmetry:e} exceeds {tolerance:e}")]
    CovarianceAsymmetric { asymmetry: f64, tolerance: f64 },

    #[error("belief covariance not positive semidefinite: min eigenvalue {min_eigenvalue:e} below {bound:e}")]
    CovarianceNotPsd { min_eigenvalue: f64, bound: f64 },

    #[error("shaft-power input variance {var} must be finite and nonnegative")]
    BadPowerVariance { var: f64 },

    #[error("shaft-power mean {mean} must be finite")]
    BadPowerMean { mean: f64 },

    #[error("placeholder power variance {p_pe_t} must be finite and positive")]
    BadPlaceholderVariance { p_pe_t: f64 },

    #[error("innovation covariance numerically singular: condition number {cond:e} at or above {limit:e}")]
    SingularInnovation { cond: f64, limit: f64 },

    #[error("step input {index} has wrong dimensions: u has {u_len} (expect {n_u}), y has {y_len} (expect {n_y})")]
    StepDimensionMismatch {
        index: usize,
        u_len: usize,
        n_u: usize,
        y_len: usize,
        n_y: usize,
    },

    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("estimator failed at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<EstimatorError>,
    },

    #[error("variance ladder must be strictly increasing and span at least {min_decades} decades")]
    BadLadder { min_decades: f64 },

    #[error("ordering check needs placeholder variance above the true one: P^PeT = {p_pe_t:e} vs P^Pe = {pe_var:e}")]
    OrderingPrecondition { p_pe_t: f64, pe_var: f64 },
}

impl EstimatorError {
    pub(crate) fn at_step(step: usize, source: EstimatorError) -> EstimatorError {
        EstimatorError::AtStep {
            step,
            source: Box::new(source),
        }
    }
}
