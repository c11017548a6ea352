//! Scenario harness for the gas-generator estimation stack: configuration
//! files, Monte Carlo case sweeps, the structural-guarantee suite, retained
//! run traces, and re-aggregation of retained traces.
//!
//! The `gasgen` binary in this crate is a thin CLI over these modules; all
//! behavior lives here so it is testable without spawning processes.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod tables;
pub mod theorems;
pub mod trace;

pub use config::{load_scenario, LoadedScenario, Provenance, ScenarioConfig};
pub use error::HarnessError;
pub use report::{reaggregate, Reaggregation};
pub use runner::{
    parse_estimators, run_case, CaseOptions, CaseResult, ClassificationSummary, EstimatorId,
};
pub use tables::{confusion_csv, render_tables};
pub use theorems::{run_theorem_suite, TheoremOptions, TheoremSuiteReport};
