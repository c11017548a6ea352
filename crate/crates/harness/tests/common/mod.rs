//! Shared fixtures for the harness integration tests: a small, fast
//! scenario wired to the shipped model file.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

/// Absolute path to the shipped gas-generator model file.
pub fn shipped_model_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models/apu_gasgen.json")
}

/// A complete scenario document small enough that a full sweep finishes
/// in well under a second: 400-step horizon, two runs per class.
pub fn mini_scenario_json() -> Value {
    json!({
        "model": shipped_model_path(),
        "case": 1,
        "seed": 7,
        "horizon": 400,
        "ramp_start": 40,
        "ramp_end": 320,
        "window": 80,
        "burn_in": 40,
        "runs_per_class": 2,
        "process_noise_pct": [0.005],
        "measurement_noise_pct": [0.005, 0.005, 0.005, 0.005],
        "qh_std": 8e-5,
        "load": {
            "mean_dwell_steps": 60.0,
            "step_amplitude_pct": 0.15,
            "jitter_pct": 0.002,
            "estimate_noise_pct": 4e-4
        },
        "estimator": {
            "pe_t_dev": 0.0,
            "p_pe_t": null,
            "init_state_std": 100.0,
            "init_theta_std": 0.01
        },
        "degradation": { "mode": "independent", "k_c": 1.0, "k_t": 1.0 },
        "controller": { "kp": 2e-4, "ki": 2e-5, "u_limit": 10.0 }
    })
}

/// Write a scenario document into `dir` and return the file's path.
pub fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let path = dir.join("scenario.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}
