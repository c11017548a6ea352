//! Retained per-run trajectories: one CSV per run plus an index file, so
//! a sweep's raw material can be inspected or re-aggregated later.
//!
//! All signal values are deviations from the operating point. Floats are
//! written with the shortest representation that parses back to the same
//! bits, so re-aggregation sees exactly what the sweep saw.

use std::fs;
use std::path::Path;

use gasgen_fdi::HealthClass;
use gasgen_plant::RunRecord;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{io_err, HarnessError};

/// Column naming shared by every trace of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceColumns {
    pub state_names: Vec<String>,
    pub param_names: Vec<String>,
    /// State names followed by parameter names; the estimated coordinates.
    pub coordinates: Vec<String>,
    pub estimators: Vec<String>,
}

/// One retained run in the index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexEntry {
    pub file: String,
    pub run_id: usize,
    pub seed: u64,
    pub class: String,
    /// Sampled end-of-run multiplier targets (plant layout).
    pub targets: Vec<f64>,
}

/// Index of a retained-runs directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunIndex {
    pub config_hash: String,
    pub seed: u64,
    pub case: u8,
    pub horizon: usize,
    pub burn_in: usize,
    pub window: usize,
    pub columns: TraceColumns,
    pub runs: Vec<IndexEntry>,
}

pub const INDEX_FILE: &str = "index.json";

/// Write one run's trace CSV; returns the file name recorded in the index.
#[allow(clippy::too_many_arguments)]
pub fn write_run_trace(
    dir: &Path,
    run_id: usize,
    class: HealthClass,
    record: &RunRecord,
    theta_map: &[usize],
    means_per_estimator: &[Vec<DVector<f64>>],
    variances: &[Vec<DVector<f64>>],
    columns: &TraceColumns,
) -> Result<String, HarnessError> {
    let file = format!("run_{}_{:04}.csv", class.slug(), run_id);
    let path = dir.join(&file);
    let mut writer = csv::Writer::from_path(&path)?;

    let n_u = record.traj.u[0].len();
    let n_y = record.traj.y[0].len();
    let n_x = columns.state_names.len();

    let mut header: Vec<String> = vec!["step".into()];
    header.extend((0..n_u).map(|i| format!("u{i}")));
    header.push("pe_true".into());
    header.push("pe_reported".into());
    header.extend((0..n_y).map(|i| format!("y{i}")));
    header.extend(columns.coordinates.iter().map(|c| format!("truth_{c}")));
    for est in &columns.estimators {
        header.extend(
            columns
                .coordinates
                .iter()
                .map(|c| format!("{est}_mean_{c}")),
        );
        header.extend(columns.coordinates.iter().map(|c| format!("{est}_var_{c}")));
    }
    writer.write_record(&header)?;

    let horizon = record.traj.x.len();
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for k in 0..horizon {
        row.clear();
        row.push(k.to_string());
        for i in 0..n_u {
            row.push(record.traj.u[k][i].to_string());
        }
        row.push(record.traj.pe_true[k].to_string());
        row.push(record.traj.pe_reported[k].to_string());
        for i in 0..n_y {
            row.push(record.traj.y[k][i].to_string());
        }
        for i in 0..n_x {
            row.push(record.traj.x[k][i].to_string());
        }
        for j in theta_map {
            row.push(record.traj.theta[k][*j].to_string());
        }
        for (means, vars) in means_per_estimator.iter().zip(variances) {
            for i in 0..columns.coordinates.len() {
                row.push(means[k][i].to_string());
            }
            for i in 0..columns.coordinates.len() {
                row.push(vars[k][i].to_string());
            }
        }
        writer.write_record(&row)?;
    }
    writer.flush().map_err(io_err(&path))?;
    Ok(file)
}

/// Write the retained-runs index.
pub fn write_index(
    dir: &Path,
    config_hash: &str,
    seed: u64,
    cfg: &ScenarioConfig,
    columns: &TraceColumns,
    entries: &[IndexEntry],
) -> Result<(), HarnessError> {
    let index = RunIndex {
        config_hash: config_hash.to_string(),
        seed,
        case: cfg.case,
        horizon: cfg.horizon,
        burn_in: cfg.burn_in,
        window: cfg.window,
        columns: columns.clone(),
        runs: entries.to_vec(),
    };
    let path = dir.join(INDEX_FILE);
    let text = serde_json::to_string_pretty(&index)?;
    fs::write(&path, text).map_err(io_err(&path))
}

/// Read a retained-runs index.
pub fn read_index(dir: &Path) -> Result<RunIndex, HarnessError> {
    let path = dir.join(INDEX_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut index: RunIndex = serde_json::from_str(&text)?;
    // Aggregation order must match the sweep's: ascending run id.
    index.runs.sort_by_key(|e| e.run_id);
    Ok(index)
}

/// One run's trace, reloaded: `truth[coord][step]` and
/// `means[estimator][coord][step]`.
#[derive(Debug)]
pub struct RunTrace {
    pub truth: Vec<Vec<f64>>,
    pub means: Vec<Vec<Vec<f64>>>,
}

/// Reload the columns re-aggregation needs from one trace CSV.
pub fn read_run_trace(
    dir: &Path,
    entry: &IndexEntry,
    columns: &TraceColumns,
) -> Result<RunTrace, HarnessError> {
    let path = dir.join(&entry.file);
    let mut reader = csv::Reader::from_path(&path)?;
    let header = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize, HarnessError> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::BadRunsDir {
                path: path.clone(),
                message: format!("column {name} missing from {}", entry.file),
            })
    };

    let truth_cols: Vec<usize> = columns
        .coordinates
        .iter()
        .map(|c| find(&format!("truth_{c}")))
        .collect::<Result<_, _>>()?;
    let mean_cols: Vec<Vec<usize>> = columns
        .estimators
        .iter()
        .map(|est| {
            columns
                .coordinates
                .iter()
                .map(|c| find(&format!("{est}_mean_{c}")))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;

    let n_coords = columns.coordinates.len();
    let mut truth = vec![Vec::new(); n_coords];
    let mut means = vec![vec![Vec::new(); n_coords]; columns.estimators.len()];
    for result in reader.records() {
        let record = result?;
        let parse = |col: usize| -> Result<f64, HarnessError> {
            record
                .get(col)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| HarnessError::BadRunsDir {
                    path: path.clone(),
                    message: format!("unparsable value in column {col} of {}", entry.file),
                })
        };
        for (i, col) in truth_cols.iter().enumerate() {
            truth[i].push(parse(*col)?);
        }
        for (e, cols) in mean_cols.iter().enumerate() {
            for (i, col) in cols.iter().enumerate() {
                means[e][i].push(parse(*col)?);
            }
        }
    }
    Ok(RunTrace { truth, means })
}
