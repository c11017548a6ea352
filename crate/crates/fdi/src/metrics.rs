use crate::FdiError;

/// Root-mean-square error between a truth and an estimate trajectory,
/// evaluated from `burn_in` onward so initial-transient error does not
/// dominate the steady-state comparison.
pub fn rmse(truth: &[f64], estimate: &[f64], burn_in: usize) -> Result<f64, FdiError> {
    if truth.len() != estimate.len() {
        return Err(FdiError::LengthMismatch {
            truth: truth.len(),
            estimate: estimate.len(),
        });
    }
    if burn_in >= truth.len() {
        return Err(FdiError::BurnInTooLong {
            burn_in,
            len: truth.len(),
        });
    }
    let n = truth.len() - burn_in;
    let sum_sq: f64 = truth[burn_in..]
        .iter()
        .zip(&estimate[burn_in..])
        .map(|(t, e)| (t - e) * (t - e))
        .sum();
    let out = (sum_sq / n as f64).sqrt();
    if !out.is_finite() {
        return Err(FdiError::NotFinite { what: "RMSE" });
    }
    Ok(out)
}

/// Percentage by which `candidate` improves on `baseline`:
/// `100 * (baseline - candidate) / baseline`. Positive means the candidate
/// is more accurate; negative means it is worse.
pub fn improvement_pct(baseline: f64, candidate: f64) -> Result<f64, FdiError> {
    if !(baseline.is_finite() && baseline > 0.0) {
        return Err(FdiError::NonPositiveBaseline { baseline });
    }
    if !candidate.is_finite() {
        return Err(FdiError::NotFinite {
            what: "candidate RMSE",
        });
    }
    Ok(100.0 * (baseline - candidate) / baseline)
}
