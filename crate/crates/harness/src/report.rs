//! Re-aggregation: rebuild sweep metrics from retained run traces rather
//! than from a live simulation. Useful to audit a sweep's outputs and to
//! recompute after raw traces are archived.

use std::collections::BTreeMap;
use std::path::Path;

use gasgen_fdi::{classify_window, improvement_pct, HealthClass};
use serde::Serialize;

use crate::error::HarnessError;
use crate::runner::{parse_estimators, Aggregator, ClassificationSummary, EstimatorId, RunPartial};
use crate::trace::{read_index, read_run_trace};

/// Metrics rebuilt from retained traces. Fields mirror the live sweep's
/// aggregates; sweep-shape metadata that traces cannot attest (failed
/// runs, runs per class) is deliberately absent.
#[derive(Debug, Clone, Serialize)]
pub struct Reaggregation {
    pub config_hash: String,
    pub seed: u64,
    pub case: u8,
    pub n_runs: usize,
    pub coordinates: Vec<String>,
    pub health_parameters: Vec<String>,
    pub rmse: BTreeMap<String, Vec<f64>>,
    pub improvement_vs_pens_pct: BTreeMap<String, Vec<f64>>,
    pub classification: BTreeMap<String, ClassificationSummary>,
}

/// Rebuild sweep metrics from a retained-runs directory.
pub fn reaggregate(runs_dir: &Path) -> Result<Reaggregation, HarnessError> {
    let index = read_index(runs_dir)?;
    let columns = &index.columns;
    let estimators: Vec<EstimatorId> = parse_estimators(&columns.estimators.join(","))?;
    let n_coords = columns.coordinates.len();
    let n_x = columns.state_names.len();
    let n_params = columns.param_names.len();
    if index.runs.is_empty() {
        return Err(HarnessError::BadRunsDir {
            path: runs_dir.to_path_buf(),
            message: "index lists no runs".into(),
        });
    }

    let mut agg = Aggregator::new(estimators.len(), n_coords, n_params);
    for entry in &index.runs {
        let trace = read_run_trace(runs_dir, entry, columns)?;
        let horizon = trace.truth[0].len();
        if horizon != index.horizon {
            return Err(HarnessError::BadRunsDir {
                path: runs_dir.to_path_buf(),
                message: format!(
                    "{} has {horizon} steps, index says {}",
                    entry.file, index.horizon
                ),
            });
        }
        let denom = (horizon - index.burn_in) as f64;

        let mut mse = Vec::with_capacity(estimators.len());
        let mut predicted = Vec::with_capacity(estimators.len());
        for e in 0..estimators.len() {
            let mut err_by_coord = vec![0.0; n_coords];
            for (i, err) in err_by_coord.iter_mut().enumerate() {
                for k in index.burn_in..horizon {
                    let diff = trace.means[e][i][k] - trace.truth[i][k];
                    *err += diff * diff;
                }
                *err /= denom;
            }
            mse.push(err_by_coord);

            let classes: Vec<HealthClass> = (0..n_params)
                .map(|j| {
                    let tail: Vec<f64> = trace.means[e][n_x + j][horizon - index.window..]
                        .iter()
                        .map(|dev| 1.0 + dev)
                        .collect();
                    classify_window(&tail, tail.len())
                })
                .collect::<Result<_, _>>()?;
            predicted.push(classes);
        }
        let actual: Vec<HealthClass> = (0..n_params)
            .map(|j| {
                let tail: Vec<f64> = trace.truth[n_x + j][horizon - index.window..]
                    .iter()
                    .map(|dev| 1.0 + dev)
                    .collect();
                classify_window(&tail, tail.len())
            })
            .collect::<Result<_, _>>()?;

        agg.add(&RunPartial {
            mse,
            actual,
            predicted,
        });
    }

    let rmse_rows = agg.rmse();
    let mut rmse = BTreeMap::new();
    for (e, id) in estimators.iter().enumerate() {
        rmse.insert(id.slug().to_string(), rmse_rows[e].clone());
    }
    let mut improvement = BTreeMap::new();
    if let Some(base_idx) = estimators.iter().position(|e| *e == EstimatorId::Pens) {
        for (e, id) in estimators.iter().enumerate() {
            if e == base_idx {
                continue;
            }
            let row: Result<Vec<f64>, _> = rmse_rows[base_idx]
                .iter()
                .zip(&rmse_rows[e])
                .map(|(base, cand)| improvement_pct(*base, *cand))
                .collect();
            improvement.insert(id.slug().to_string(), row?);
        }
    }
    let classification = agg.classification(&estimators, &columns.param_names);

    Ok(Reaggregation {
        config_hash: index.config_hash.clone(),
        seed: index.seed,
        case: index.case,
        n_runs: index.runs.len(),
        coordinates: columns.coordinates.clone(),
        health_parameters: columns.param_names.clone(),
        rmse,
        improvement_vs_pens_pct: improvement,
        classification,
    })
}
