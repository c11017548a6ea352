//! Scenario configuration: one JSON file fully determines a Monte Carlo
//! experiment — model file, noise levels, load profile, degradation mode,
//! estimator assumptions, sweep sizes, and the master seed.

use std::fs;
use std::path::{Path, PathBuf};

use gasgen_model::GasGenModel;
use gasgen_plant::{DegradationMode, LoadParams, PiParams};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError};

/// Factor between the placeholder power-error variance and the stationary
/// variance of the load profile the placeholder ignores. Large enough
/// that the filter treats the whole load swing as uninformative; used
/// whenever the configuration does not pin `p_pe_t` explicitly.
pub const PLACEHOLDER_VARIANCE_FACTOR: f64 = 1e4;

fn default_seed() -> u64 {
    42
}
fn default_window() -> usize {
    500
}
fn default_burn_in() -> usize {
    200
}
fn default_runs_per_class() -> usize {
    100
}

/// Stochastic load-profile settings, relative to the operating-point
/// shaft power.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadConfig {
    /// Mean dwell of a demand level, in steps.
    pub mean_dwell_steps: f64,
    /// Demand-step amplitude as a fraction of operating-point power.
    pub step_amplitude_pct: f64,
    /// Broadband load jitter, fraction of operating-point power.
    pub jitter_pct: f64,
    /// Shaft-power estimate error, fraction of operating-point power.
    pub estimate_noise_pct: f64,
}

impl Default for LoadConfig {
    fn default() -> Self {
        LoadConfig {
            mean_dwell_steps: 300.0,
            step_amplitude_pct: 0.15,
            jitter_pct: 0.002,
            estimate_noise_pct: 4e-4,
        }
    }
}

/// Estimator-side assumptions shared by the whole sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    /// Placeholder shaft-power deviation fed to the power-agnostic filter.
    pub pe_t_dev: f64,
    /// Placeholder power-error variance. `null` derives it from the load
    /// profile via [`PLACEHOLDER_VARIANCE_FACTOR`].
    pub p_pe_t: Option<f64>,
    /// Initial belief: standard deviation per state component.
    pub init_state_std: f64,
    /// Initial belief: standard deviation per health parameter.
    pub init_theta_std: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            pe_t_dev: 0.0,
            p_pe_t: None,
            init_state_std: 100.0,
            init_theta_std: 0.01,
        }
    }
}

/// How seeded degradation moves the four health parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegradationModeConfig {
    Independent,
    Coupled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegradationConfig {
    pub mode: DegradationModeConfig,
    /// Compressor flow-to-efficiency coupling gain (coupled mode).
    pub k_c: f64,
    /// Turbine flow-to-efficiency coupling gain (coupled mode).
    pub k_t: f64,
}

impl Default for DegradationConfig {
    fn default() -> Self {
        DegradationConfig {
            mode: DegradationModeConfig::Independent,
            k_c: 1.0,
            k_t: 1.0,
        }
    }
}

/// Speed-governor settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    pub kp: f64,
    pub ki: f64,
    pub u_limit: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            kp: 2e-4,
            ki: 2e-5,
            u_limit: 10.0,
        }
    }
}

/// One experiment, fully specified.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Model file, relative to the configuration file's directory.
    pub model: PathBuf,
    /// Scenario label (1–3); selects nothing by itself, every behavioural
    /// knob is explicit in the fields below.
    pub case: u8,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub horizon: usize,
    /// First step of the degradation ramp.
    pub ramp_start: usize,
    /// First step at which degradation targets are fully reached.
    pub ramp_end: usize,
    /// Classification window: the mean over this many final steps decides
    /// a run's class.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Steps excluded from RMSE while the filters converge from their
    /// initial belief.
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_runs_per_class")]
    pub runs_per_class: usize,
    /// Process-noise standard deviation per state, as a fraction of the
    /// state's operating point. Overrides the model file's `Q`.
    pub process_noise_pct: Vec<f64>,
    /// Measurement-noise standard deviation per channel, as a fraction of
    /// the channel's operating point. Overrides the model file's `R`.
    pub measurement_noise_pct: Vec<f64>,
    /// Health random-walk standard deviation per step (multiplier units).
    /// Overrides the model file's `Qh`.
    pub qh_std: f64,
    #[serde(default)]
    pub load: LoadConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub degradation: DegradationConfig,
    #[serde(default)]
    pub controller: ControllerConfig,
}

/// A parsed configuration together with the loaded, override-applied
/// model and the configuration fingerprint.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub config: ScenarioConfig,
    /// Model with `Q`/`R`/`Qh` replaced per the configuration (the plant
    /// truth; estimation may further reduce it in coupled mode).
    pub model: GasGenModel,
    /// FNV-1a fingerprint of the configuration file's parsed content.
    pub config_hash: String,
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<ScenarioConfig, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let config: ScenarioConfig = serde_json::from_str(&text)?;
        Ok(config)
    }

    /// Model path resolved against the directory the configuration file
    /// lives in.
    pub fn resolve_model(&self, config_path: &Path) -> PathBuf {
        if self.model.is_absolute() {
            self.model.clone()
        } else {
            config_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(&self.model)
        }
    }

    /// Structural validation against the model's dimensions. Field-level
    /// range checks live here; covariance-level checks run when the
    /// override-applied model revalidates.
    pub fn validate(&self, n_x: usize, n_y: usize) -> Result<(), HarnessError> {
        let fail = |message: String| Err(HarnessError::Config { message });

        if !(1..=3).contains(&self.case) {
            return fail(format!("case label {} outside 1..=3", self.case));
        }
        if self.horizon == 0 {
            return fail("horizon must be at least 1 step".into());
        }
        if !(self.ramp_start < self.ramp_end && self.ramp_end <= self.horizon) {
            return fail(format!(
                "ramp [{}, {}) does not fit horizon {}",
                self.ramp_start, self.ramp_end, self.horizon
            ));
        }
        if self.window == 0 || self.window > self.horizon {
            return fail(format!(
                "window {} must be in 1..={}",
                self.window, self.horizon
            ));
        }
        if self.burn_in >= self.horizon {
            return fail(format!(
                "burn-in {} leaves nothing of horizon {}",
                self.burn_in, self.horizon
            ));
        }
        if self.runs_per_class == 0 {
            return fail("runs_per_class must be positive".into());
        }
        if self.process_noise_pct.len() != n_x {
            return fail(format!(
                "process_noise_pct has {} entries, model has {} states",
                self.process_noise_pct.len(),
                n_x
            ));
        }
        if self.measurement_noise_pct.len() != n_y {
            return fail(format!(
                "measurement_noise_pct has {} entries, model has {} outputs",
                self.measurement_noise_pct.len(),
                n_y
            ));
        }
        for (what, values) in [
            ("process_noise_pct", &self.process_noise_pct),
            ("measurement_noise_pct", &self.measurement_noise_pct),
        ] {
            if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return fail(format!("{what} entries must be finite and positive"));
            }
        }
        if !(self.qh_std.is_finite() && self.qh_std > 0.0) {
            return fail(format!(
                "qh_std {} must be finite and positive",
                self.qh_std
            ));
        }
        let l = &self.load;
        for (what, value, lo_ok) in [
            (
                "load.mean_dwell_steps",
                l.mean_dwell_steps,
                l.mean_dwell_steps >= 1.0,
            ),
            (
                "load.step_amplitude_pct",
                l.step_amplitude_pct,
                l.step_amplitude_pct > 0.0,
            ),
            ("load.jitter_pct", l.jitter_pct, l.jitter_pct >= 0.0),
            (
                "load.estimate_noise_pct",
                l.estimate_noise_pct,
                l.estimate_noise_pct > 0.0,
            ),
        ] {
            if !(value.is_finite() && lo_ok) {
                return fail(format!("{what} = {value} is out of range"));
            }
        }
        let e = &self.estimator;
        if !e.pe_t_dev.is_finite() {
            return fail("estimator.pe_t_dev must be finite".into());
        }
        if let Some(p) = e.p_pe_t {
            if !(p.is_finite() && p > 0.0) {
                return fail(format!(
                    "estimator.p_pe_t = {p} must be finite and positive"
                ));
            }
        }
        for (what, value) in [
            ("estimator.init_state_std", e.init_state_std),
            ("estimator.init_theta_std", e.init_theta_std),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return fail(format!("{what} = {value} must be finite and positive"));
            }
        }
        if self.degradation.mode == DegradationModeConfig::Coupled {
            for (what, value) in [
                ("degradation.k_c", self.degradation.k_c),
                ("degradation.k_t", self.degradation.k_t),
            ] {
                if !(value.is_finite() && value > 0.0) {
                    return fail(format!("{what} = {value} must be finite and positive"));
                }
            }
        }
        let c = &self.controller;
        for (what, value, ok) in [
            ("controller.kp", c.kp, c.kp >= 0.0),
            ("controller.ki", c.ki, c.ki >= 0.0),
            ("controller.u_limit", c.u_limit, c.u_limit > 0.0),
        ] {
            if !(value.is_finite() && ok) {
                return fail(format!("{what} = {value} is out of range"));
            }
        }
        Ok(())
    }

    /// Apply the configuration's noise overrides to a freshly loaded
    /// model: `Q`, `R` from the percentage settings and the operating
    /// point, `Qh` from `qh_std`. Revalidates the result.
    pub fn working_model(&self, base: &GasGenModel) -> Result<GasGenModel, HarnessError> {
        let mut model = base.clone();
        let q_std: Vec<f64> = self
            .process_noise_pct
            .iter()
            .zip(model.ss.x.iter())
            .map(|(pct, ss)| pct * ss)
            .collect();
        let r_std: Vec<f64> = self
            .measurement_noise_pct
            .iter()
            .zip(model.ss.y.iter())
            .map(|(pct, ss)| pct * ss)
            .collect();
        model.q = DMatrix::from_fn(q_std.len(), q_std.len(), |i, j| {
            if i == j {
                q_std[i] * q_std[i]
            } else {
                0.0
            }
        });
        model.r = DMatrix::from_fn(r_std.len(), r_std.len(), |i, j| {
            if i == j {
                r_std[i] * r_std[i]
            } else {
                0.0
            }
        });
        let n_theta = model.dims.n_theta;
        model.qh = DMatrix::from_fn(n_theta, n_theta, |i, j| {
            if i == j {
                self.qh_std * self.qh_std
            } else {
                0.0
            }
        });
        model.validate()?;
        Ok(model)
    }

    /// Absolute load parameters at the model's operating-point power.
    pub fn load_params(&self, pe_ss: f64) -> LoadParams {
        LoadParams {
            mean_dwell_steps: self.load.mean_dwell_steps,
            step_amplitude: self.load.step_amplitude_pct * pe_ss,
            jitter_std: self.load.jitter_pct * pe_ss,
            estimate_noise_std: self.load.estimate_noise_pct * pe_ss,
        }
    }

    pub fn pi_params(&self) -> PiParams {
        PiParams {
            kp: self.controller.kp,
            ki: self.controller.ki,
            u_limit: self.controller.u_limit,
        }
    }

    pub fn degradation_mode(&self) -> DegradationMode {
        match self.degradation.mode {
            DegradationModeConfig::Independent => DegradationMode::Independent,
            DegradationModeConfig::Coupled => DegradationMode::Coupled {
                k_c: self.degradation.k_c,
                k_t: self.degradation.k_t,
            },
        }
    }

    /// Placeholder power-error variance: explicit if configured, else
    /// scaled up from the load profile's stationary variance.
    pub fn placeholder_variance(&self, load: &LoadParams) -> f64 {
        self.estimator
            .p_pe_t
            .unwrap_or_else(|| PLACEHOLDER_VARIANCE_FACTOR * load.profile_variance())
    }

    /// Fingerprint of the configuration as parsed (serialization is
    /// field-ordered, so the hash is stable for equal settings).
    pub fn fingerprint(&self) -> Result<String, HarnessError> {
        let canonical = serde_json::to_string(self)?;
        Ok(format!("{:016x}", fnv1a64(canonical.as_bytes())))
    }
}

/// Load a configuration file, then load and override its model.
pub fn load_scenario(config_path: &Path) -> Result<LoadedScenario, HarnessError> {
    let config = ScenarioConfig::from_file(config_path)?;
    let model_path = config.resolve_model(config_path);
    let base = GasGenModel::from_json_file(&model_path)?;
    config.validate(base.dims.n_x, base.dims.n_y)?;
    let model = config.working_model(&base)?;
    let config_hash = config.fingerprint()?;
    Ok(LoadedScenario {
        config,
        model,
        config_hash,
    })
}

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in bytes {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Experiment provenance embedded in every output file: enough to rerun
/// the exact sweep, never wall-clock state, so reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub estimators: Vec<String>,
}
