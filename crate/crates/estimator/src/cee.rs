//! Estimation-error covariance (CEE) recursions.
//!
//! For a linear filter run with a *fixed* gain sequence, the covariance of
//! the actual estimation error `x_hat - x` obeys
//!
//! ```text
//! CEE^-_k = A CEE^+_{k-1} A' + pe_var_k F F' + Q_aug
//! CEE^+_k = (I - K_k C) CEE^-_k (I - K_k C)' + K_k R K_k'
//! ```
//!
//! where `pe_var_k` is the *true* power-error variance and the posterior
//! CEE propagates through the time update. When the gains come from a
//! filter whose assumed statistics are the true ones (PES with an honest
//! power feed), this reproduces the filter's reported posterior covariance
//! exactly; when the gains come from the placeholder-variance filter
//! (PENS/MPES) it yields the error covariance those gains actually achieve
//! under the true statistics.

use nalgebra::DMatrix;

use crate::filter::{joseph, predict_cov};
use crate::{EstimatorError, FilterModel, GaussianBelief};

/// Propagate the estimation-error covariance under a fixed gain sequence
/// and a per-step true power-error variance. Returns the posterior CEE at
/// every step.
pub fn cee_with_gains(
    fm: &FilterModel,
    init_cov: &DMatrix<f64>,
    gains: &[DMatrix<f64>],
    true_pe_vars: &[f64],
) -> Result<Vec<DMatrix<f64>>, EstimatorError> {
    GaussianBelief::from_cov(init_cov.clone()).validate(fm.n())?;
    if gains.len() != true_pe_vars.len() {
        return Err(EstimatorError::LengthMismatch {
            what: "true power-variance schedule",
            expected: gains.len(),
            got: true_pe_vars.len(),
        });
    }

    let mut out = Vec::with_capacity(gains.len());
    let mut cee = init_cov.clone();
    for (k, gain) in gains.iter().enumerate() {
        let pe_var = true_pe_vars[k];
        if !(pe_var.is_finite() && pe_var >= 0.0) {
            return Err(EstimatorError::at_step(
                k,
                EstimatorError::BadPowerVariance { var: pe_var },
            ));
        }
        let prior = predict_cov(fm, &cee, pe_var);
        cee = joseph(fm, &prior, gain);
        out.push(cee.clone());
    }
    Ok(out)
}

/// CEE under the power-informed filter's own gains. With an honest power
/// feed the assumed and true statistics coincide, so this equals the
/// filter-reported posterior covariance sequence.
pub fn cee_recursion_pes(
    fm: &FilterModel,
    init_cov: &DMatrix<f64>,
    gains: &[DMatrix<f64>],
    pe_vars: &[f64],
) -> Result<Vec<DMatrix<f64>>, EstimatorError> {
    cee_with_gains(fm, init_cov, gains, pe_vars)
}

/// CEE actually achieved by the placeholder-variance gains (PENS/MPES share
/// them) when the power error truly has variance `true_pe_var`.
pub fn cee_recursion_mpes(
    fm: &FilterModel,
    init_cov: &DMatrix<f64>,
    gains: &[DMatrix<f64>],
    true_pe_var: f64,
) -> Result<Vec<DMatrix<f64>>, EstimatorError> {
    let schedule = vec![true_pe_var; gains.len()];
    cee_with_gains(fm, init_cov, gains, &schedule)
}
