//! Closed-loop gas generator simulator for Monte Carlo fault-detection
//! studies.
//!
//! The plant runs the linearized gas generator in deviation coordinates
//! under a proportional-integral speed governor, a stochastic shaft-power
//! load, and injectable gas-path degradation: efficiency and flow-capacity
//! multipliers ramp from as-new toward sampled severity targets, either
//! independently per parameter or with flow locked to efficiency through
//! per-spool coupling gains.
//!
//! Two simulation modes cover the two consumers:
//!
//! * [`simulate_run`] — a degraded run for detection/isolation studies;
//! * [`simulate_consistent`] — truth that follows exactly the stochastic
//!   model an augmented-state filter assumes, for validating analytic
//!   error covariances against Monte Carlo statistics.
//!
//! Every random draw goes through the caller's RNG in a frozen order, so
//! one seed reproduces a run bit-for-bit.

mod controller;
mod degradation;
mod error;
mod load;
mod simulate;

pub use controller::{PiController, PiParams};
pub use degradation::{
    target_band, DegradationMode, DegradationPlan, SEVERE_TARGET_MIN, TARGET_MAX,
};
pub use error::PlantError;
pub use load::{report_load, sample_load, LoadParams};
pub use simulate::{
    simulate_consistent, simulate_run, ConsistentSpec, RunRecord, RunSpec, Trajectories,
    DIVERGENCE_FACTOR,
};
