//! Shaft-power load profiles: piecewise-constant demand with dwell times,
//! step levels, broadband jitter, and a noisy power estimate feed.

use rand::distributions::Uniform;
use rand::Rng;
use rand_distr::{Exp, Normal, StandardNormal};

use crate::PlantError;

/// Stochastic load-profile parameters, all in absolute units (watts of
/// shaft-power deviation from the operating point, steps of dwell).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadParams {
    /// Mean dwell of a demand level, in steps (exponentially distributed,
    /// truncated to at least one step).
    pub mean_dwell_steps: f64,
    /// Demand levels are uniform in `[-step_amplitude, step_amplitude)`.
    pub step_amplitude: f64,
    /// Standard deviation of the per-step broadband load jitter.
    pub jitter_std: f64,
    /// Standard deviation of the shaft-power estimate error, i.e. of
    /// `reported - true` power.
    pub estimate_noise_std: f64,
}

impl LoadParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let checks: [(&'static str, f64, bool); 4] = [
            (
                "mean_dwell_steps",
                self.mean_dwell_steps,
                self.mean_dwell_steps.is_finite() && self.mean_dwell_steps >= 1.0,
            ),
            (
                "step_amplitude",
                self.step_amplitude,
                self.step_amplitude.is_finite() && self.step_amplitude > 0.0,
            ),
            (
                "jitter_std",
                self.jitter_std,
                self.jitter_std.is_finite() && self.jitter_std >= 0.0,
            ),
            (
                "estimate_noise_std",
                self.estimate_noise_std,
                self.estimate_noise_std.is_finite() && self.estimate_noise_std > 0.0,
            ),
        ];
        for (what, value, ok) in checks {
            if !ok {
                return Err(PlantError::BadLoadParam { what, value });
            }
        }
        Ok(())
    }

    /// Stationary variance of the true load deviation: uniform step levels
    /// contribute `amplitude^2 / 3`, the jitter its own variance. Used to
    /// size placeholder power-error variances relative to the actual
    /// signal the placeholder ignores.
    pub fn profile_variance(&self) -> f64 {
        self.step_amplitude * self.step_amplitude / 3.0 + self.jitter_std * self.jitter_std
    }

    /// Variance of the power-estimate error, the honest variance feed for
    /// a power-informed estimator.
    pub fn estimate_variance(&self) -> f64 {
        self.estimate_noise_std * self.estimate_noise_std
    }
}

/// Sample the true load deviation over `horizon` steps.
///
/// Draw order (frozen for reproducibility): per segment a dwell then a
/// level, until the horizon is covered; then one jitter draw per step.
pub fn sample_load<R: Rng + ?Sized>(
    params: &LoadParams,
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<f64>, PlantError> {
    params.validate()?;
    let dwell_dist = Exp::new(1.0 / params.mean_dwell_steps).expect("validated rate");
    let level_dist = Uniform::new(-params.step_amplitude, params.step_amplitude);

    let mut pe = vec![0.0f64; horizon];
    let mut t = 0usize;
    while t < horizon {
        let dwell = (rng.sample(dwell_dist).floor() as usize).max(1);
        let level = rng.sample(level_dist);
        let end = (t + dwell).min(horizon);
        pe[t..end].fill(level);
        t = end;
    }
    if params.jitter_std > 0.0 {
        let jitter = Normal::new(0.0, params.jitter_std).expect("validated std");
        for value in &mut pe {
            *value += rng.sample(jitter);
        }
    }
    Ok(pe)
}

/// Corrupt a true load trajectory into the reported power-estimate feed:
/// one independent Gaussian estimate error per step.
pub fn report_load<R: Rng + ?Sized>(params: &LoadParams, pe_true: &[f64], rng: &mut R) -> Vec<f64> {
    pe_true
        .iter()
        .map(|pe| pe + params.estimate_noise_std * rng.sample::<f64, _>(StandardNormal))
        .collect()
}
