//! Injectable gas-path degradation: per-run severity targets and the
//! health-parameter trajectories that ramp toward them.

use gasgen_fdi::HealthClass;
use nalgebra::DVector;
use rand::distributions::Uniform;
use rand::Rng;

use crate::PlantError;

/// Most degraded multiplier a seeded fault ramps to. The severe band is
/// open-ended below, but the linearized model only holds near the
/// operating point, so seeded severity stays within its trust region.
pub const SEVERE_TARGET_MIN: f64 = 0.92;

/// Least degraded multiplier: as-new hardware. Health parameters never
/// exceed 1, so even "healthy" runs carry a small wear ramp inside the
/// healthy band rather than a perfectly constant parameter.
pub const TARGET_MAX: f64 = 1.0;

/// Multiplier band `[lo, hi)` that degradation targets of a class are
/// drawn from. Unlike [`HealthClass::interval`] this is bounded on both
/// ends (see [`SEVERE_TARGET_MIN`], [`TARGET_MAX`]).
pub fn target_band(class: HealthClass) -> (f64, f64) {
    let (lo, hi) = class.interval();
    (lo.max(SEVERE_TARGET_MIN), hi.min(TARGET_MAX))
}

/// How the four health parameters degrade relative to each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegradationMode {
    /// Each parameter ramps to its own independently drawn target.
    Independent,
    /// Physically coupled wear: each flow-capacity deviation is locked to
    /// its efficiency deviation, `f - 1 = k * (e - 1)`, with per-spool
    /// gains for the compressor and turbine.
    Coupled { k_c: f64, k_t: f64 },
}

/// A run's degradation schedule: which class it belongs to, where the
/// linear ramp sits inside the horizon, and the sampled end-of-run
/// multiplier targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationPlan {
    pub class: HealthClass,
    pub mode: DegradationMode,
    /// First step of the linear ramp; parameters are as-new before it.
    pub ramp_start: usize,
    /// First step at which the targets are fully reached.
    pub ramp_end: usize,
    /// End-of-run multiplier per parameter. In coupled mode the flow
    /// entries are derived from the efficiency entries.
    pub targets: Vec<f64>,
}

impl DegradationPlan {
    /// Draw a plan for `class`. Independent mode draws all `n_theta`
    /// targets from the class band; coupled mode draws the two efficiency
    /// targets and derives the flow targets through the coupling gains.
    ///
    /// Draw order (frozen for reproducibility): the uniform targets, in
    /// parameter order.
    pub fn sample<R: Rng + ?Sized>(
        class: HealthClass,
        mode: DegradationMode,
        n_theta: usize,
        ramp_start: usize,
        ramp_end: usize,
        horizon: usize,
        rng: &mut R,
    ) -> Result<Self, PlantError> {
        if !(ramp_start < ramp_end && ramp_end <= horizon) {
            return Err(PlantError::BadRampWindow {
                start: ramp_start,
                end: ramp_end,
                horizon,
            });
        }
        let (lo, hi) = target_band(class);
        let band = Uniform::new(lo, hi);
        let targets = match mode {
            DegradationMode::Independent => (0..n_theta).map(|_| rng.sample(band)).collect(),
            DegradationMode::Coupled { k_c, k_t } => {
                if n_theta != 4 {
                    return Err(PlantError::CoupledLayout { n_theta });
                }
                check_gain("k_c", k_c)?;
                check_gain("k_t", k_t)?;
                let e_c = rng.sample(band);
                let e_t = rng.sample(band);
                // Exact in deviation space: f - 1 = k * (e - 1).
                vec![e_c, 1.0 + k_c * (e_c - 1.0), e_t, 1.0 + k_t * (e_t - 1.0)]
            }
        };
        Ok(DegradationPlan {
            class,
            mode,
            ramp_start,
            ramp_end,
            targets,
        })
    }

    /// Health-parameter deviations (multiplier minus 1) at every step:
    /// zero before the ramp, linear over `[ramp_start, ramp_end)`, and
    /// held at the target from `ramp_end` on.
    ///
    /// In coupled mode the flow deviations are computed as exactly
    /// `k * e_deviation` at every step, so the coupling constraint holds
    /// bit-for-bit along the whole ramp, not just at the endpoints.
    pub fn trajectories(&self, horizon: usize) -> Vec<DVector<f64>> {
        let n_theta = self.targets.len();
        let span = (self.ramp_end - self.ramp_start) as f64;
        let mut out = Vec::with_capacity(horizon);
        for k in 0..horizon {
            let frac = if k < self.ramp_start {
                0.0
            } else if k < self.ramp_end {
                (k - self.ramp_start) as f64 / span
            } else {
                1.0
            };
            let dev = match self.mode {
                DegradationMode::Independent => {
                    DVector::from_fn(n_theta, |j, _| (self.targets[j] - 1.0) * frac)
                }
                DegradationMode::Coupled { k_c, k_t } => {
                    let e_c = (self.targets[0] - 1.0) * frac;
                    let e_t = (self.targets[2] - 1.0) * frac;
                    DVector::from_vec(vec![e_c, k_c * e_c, e_t, k_t * e_t])
                }
            };
            out.push(dev);
        }
        out
    }
}

fn check_gain(what: &'static str, value: f64) -> Result<(), PlantError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(PlantError::BadCouplingGain { what, value })
    }
}
