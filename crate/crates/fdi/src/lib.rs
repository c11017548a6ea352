//! Fault detection and isolation layer: turn per-run health-parameter
//! estimates into severity classes and aggregate classification quality
//! across a Monte Carlo sweep.
//!
//! The health parameters are multiplicative efficiency/flow factors with
//! 1.0 as the as-new value. A run is classified by the mean of its final
//! estimation window against fixed severity bands ([`HealthClass`]), runs
//! are tallied into a [`ConfusionMatrix`], and estimator families are
//! compared via macro-averaged precision/recall/F1 plus RMSE-based
//! accuracy improvements ([`rmse`], [`improvement_pct`]).
//!
//! Everything here is estimator-agnostic plain-slice arithmetic; model
//! and filter types stay in their own crates.

mod class;
mod confusion;
mod error;
mod metrics;

pub use class::{classify_window, HealthClass, HEALTHY_MIN, MEDIUM_MIN, MINOR_MIN};
pub use confusion::{ClassMetrics, ConfusionMatrix, MacroMetrics};
pub use error::FdiError;
pub use metrics::{improvement_pct, rmse};
