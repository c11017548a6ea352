//! Monte Carlo sweep: simulate degraded runs, filter each with the
//! requested estimators, and aggregate estimation accuracy and
//! classification quality.
//!
//! The filters are linear, so their gain and covariance sequences depend
//! only on assumed statistics, never on measured data. The sweep exploits
//! that: gains are computed once per estimator family, then each run only
//! pays for a means-only filtering pass. The result is bit-identical to
//! running the full predict/update filter on every run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use gasgen_estimator::{
    gain_trace, mean_pass, EstimatorKind, FilterModel, ShaftPowerInput, StepInput,
};
use gasgen_fdi::{classify_window, improvement_pct, ConfusionMatrix, HealthClass, MacroMetrics};
use gasgen_model::GasGenModel;
use gasgen_plant::{simulate_run, RunRecord, RunSpec};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{LoadedScenario, Provenance};
use crate::error::HarnessError;
use crate::trace::{write_index, write_run_trace, IndexEntry, TraceColumns};

/// Fraction of runs allowed to fail (diverge or reject filtering) before
/// the whole sweep is declared unusable.
pub const FAILURE_TOLERANCE: f64 = 0.01;

/// The three estimator families the sweep can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorId {
    /// Power-informed: accurate power mean and honest error variance.
    Pes,
    /// Power-agnostic: placeholder mean and placeholder variance.
    Pens,
    /// Modified power-informed: accurate mean, placeholder variance.
    Mpes,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 3] = [EstimatorId::Pes, EstimatorId::Pens, EstimatorId::Mpes];

    pub fn slug(self) -> &'static str {
        match self {
            EstimatorId::Pes => "pes",
            EstimatorId::Pens => "pens",
            EstimatorId::Mpes => "mpes",
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for EstimatorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pes" => Ok(EstimatorId::Pes),
            "pens" => Ok(EstimatorId::Pens),
            "mpes" => Ok(EstimatorId::Mpes),
            other => Err(format!(
                "unknown estimator {other:?} (expected pes, pens, or mpes)"
            )),
        }
    }
}

/// Parse a comma-separated estimator list, preserving order and dropping
/// duplicates.
pub fn parse_estimators(list: &str) -> Result<Vec<EstimatorId>, HarnessError> {
    let mut out = Vec::new();
    for part in list.split(',') {
        if part.trim().is_empty() {
            continue;
        }
        let id = EstimatorId::from_str(part).map_err(|message| HarnessError::Config { message })?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    if out.is_empty() {
        return Err(HarnessError::Config {
            message: "estimator list is empty".into(),
        });
    }
    Ok(out)
}

/// Sweep options beyond the scenario file.
#[derive(Debug, Clone)]
pub struct CaseOptions {
    pub estimators: Vec<EstimatorId>,
    /// Worker threads; 0 lets the runtime choose.
    pub jobs: usize,
    /// Master seed override; `None` uses the configured seed.
    pub seed: Option<u64>,
}

impl Default for CaseOptions {
    fn default() -> Self {
        CaseOptions {
            estimators: EstimatorId::ALL.to_vec(),
            jobs: 0,
            seed: None,
        }
    }
}

/// One run that could not be used, with the sweep position it held.
#[derive(Debug, Clone, Serialize)]
pub struct RunFailureInfo {
    pub run_id: usize,
    pub class: String,
    pub message: String,
}

/// Classification quality of one estimator for one health parameter.
#[derive(Debug, Clone, Serialize)]
pub struct ParamClassification {
    pub metrics: MacroMetrics,
    /// Fraction of actually severe runs flagged severe; `null` if the
    /// sweep produced no usable severe runs.
    pub severe_tpr: Option<f64>,
    pub confusion: ConfusionMatrix,
}

/// Classification quality of one estimator, macro-averaged over the
/// health parameters it estimates.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationSummary {
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub severe_tpr: f64,
    pub per_parameter: BTreeMap<String, ParamClassification>,
}

/// Aggregated outcome of one Monte Carlo case sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub provenance: Provenance,
    pub case: u8,
    pub horizon: usize,
    pub burn_in: usize,
    pub window: usize,
    pub runs_per_class: usize,
    pub n_runs: usize,
    pub n_succeeded: usize,
    pub n_failed: usize,
    /// Estimated coordinates: state components then health parameters.
    pub coordinates: Vec<String>,
    pub health_parameters: Vec<String>,
    /// Root-mean-square estimation error per coordinate, pooled over all
    /// usable runs, keyed by estimator.
    pub rmse: BTreeMap<String, Vec<f64>>,
    /// Percent RMSE reduction relative to the power-agnostic baseline,
    /// per coordinate; present when the sweep includes `pens`.
    pub improvement_vs_pens_pct: BTreeMap<String, Vec<f64>>,
    pub classification: BTreeMap<String, ClassificationSummary>,
    pub failures: Vec<RunFailureInfo>,
}

/// Per-run quantities the aggregation consumes.
pub(crate) struct RunPartial {
    /// Time-mean squared estimation error per estimator per coordinate.
    pub(crate) mse: Vec<Vec<f64>>,
    /// Actual class per health parameter (from the truth trajectory).
    pub(crate) actual: Vec<HealthClass>,
    /// Predicted class per estimator per health parameter.
    pub(crate) predicted: Vec<Vec<HealthClass>>,
}

struct RunFailure {
    run_id: usize,
    class: HealthClass,
    message: String,
}

/// Order-insensitive sweep aggregation (runs are folded in run-id order
/// regardless of which worker produced them). Shared by the live sweep
/// and by re-aggregation from retained traces.
pub(crate) struct Aggregator {
    n_estimators: usize,
    n_coords: usize,
    n_params: usize,
    count: usize,
    mse_sum: Vec<Vec<f64>>,
    confusions: Vec<Vec<ConfusionMatrix>>,
}

impl Aggregator {
    pub(crate) fn new(n_estimators: usize, n_coords: usize, n_params: usize) -> Self {
        Aggregator {
            n_estimators,
            n_coords,
            n_params,
            count: 0,
            mse_sum: vec![vec![0.0; n_coords]; n_estimators],
            confusions: vec![vec![ConfusionMatrix::new(); n_params]; n_estimators],
        }
    }

    pub(crate) fn add(&mut self, partial: &RunPartial) {
        self.count += 1;
        for e in 0..self.n_estimators {
            for i in 0..self.n_coords {
                self.mse_sum[e][i] += partial.mse[e][i];
            }
            for j in 0..self.n_params {
                self.confusions[e][j].record(partial.actual[j], partial.predicted[e][j]);
            }
        }
    }

    pub(crate) fn count(&self) -> usize {
        self.count
    }

    /// Pooled RMSE per estimator per coordinate:
    /// `sqrt(mean over runs of per-run mean-square error)`.
    pub(crate) fn rmse(&self) -> Vec<Vec<f64>> {
        self.mse_sum
            .iter()
            .map(|row| {
                row.iter()
                    .map(|sum| (sum / self.count as f64).sqrt())
                    .collect()
            })
            .collect()
    }

    pub(crate) fn classification(
        &self,
        estimators: &[EstimatorId],
        param_names: &[String],
    ) -> BTreeMap<String, ClassificationSummary> {
        let mut out = BTreeMap::new();
        for (e, id) in estimators.iter().enumerate() {
            let mut per_parameter = BTreeMap::new();
            let (mut p_sum, mut r_sum, mut f_sum, mut tpr_sum) = (0.0, 0.0, 0.0, 0.0);
            for (j, name) in param_names.iter().enumerate() {
                let confusion = self.confusions[e][j].clone();
                let metrics = confusion.macro_metrics();
                let severe_tpr = confusion.severe_tpr();
                p_sum += metrics.precision;
                r_sum += metrics.recall;
                f_sum += metrics.f1;
                tpr_sum += severe_tpr.unwrap_or(0.0);
                per_parameter.insert(
                    name.clone(),
                    ParamClassification {
                        metrics,
                        severe_tpr,
                        confusion,
                    },
                );
            }
            let n = param_names.len() as f64;
            out.insert(
                id.slug().to_string(),
                ClassificationSummary {
                    macro_precision: p_sum / n,
                    macro_recall: r_sum / n,
                    macro_f1: f_sum / n,
                    severe_tpr: tpr_sum / n,
                    per_parameter,
                },
            );
        }
        out
    }
}

/// Human-readable state coordinate names.
pub fn state_names(n_x: usize) -> Vec<String> {
    if n_x == 1 {
        vec!["n".to_string()]
    } else {
        (0..n_x).map(|i| format!("x{i}")).collect()
    }
}

/// Human-readable health-parameter names in the estimated layout.
pub fn health_param_names(n_theta: usize) -> Vec<String> {
    match n_theta {
        4 => ["ec", "fc", "et", "ft"].map(String::from).to_vec(),
        2 => ["ec", "et"].map(String::from).to_vec(),
        n => (0..n).map(|j| format!("th{j}")).collect(),
    }
}

/// Indices of the plant's full health vector that the estimated health
/// parameters correspond to: identity for independent degradation, the
/// efficiency slots for coupled degradation.
pub fn theta_map(full_n_theta: usize, estimated_n_theta: usize) -> Vec<usize> {
    if estimated_n_theta == full_n_theta {
        (0..full_n_theta).collect()
    } else {
        // Coupled reduction keeps [e_c, e_t] out of [e_c, f_c, e_t, f_t].
        vec![0, 2]
    }
}

/// Everything shared by all runs of one sweep.
struct CaseContext<'a> {
    sim_model: &'a GasGenModel,
    fm: &'a FilterModel,
    spec: RunSpec,
    master_seed: u64,
    burn_in: usize,
    window: usize,
    theta_map: &'a [usize],
    estimators: &'a [EstimatorId],
    kinds: Vec<EstimatorKind>,
    gains: Vec<&'a [DMatrix<f64>]>,
    /// Posterior standard-deviation trajectories per estimator (shared by
    /// every run), present only when traces are retained.
    trace: Option<TraceShared<'a>>,
}

struct TraceShared<'a> {
    dir: &'a Path,
    columns: &'a TraceColumns,
    variances: &'a [Vec<DVector<f64>>],
}

/// Run one Monte Carlo case sweep. When `trace_dir` is given, every
/// usable run's trajectories are retained as CSV next to an index file.
pub fn run_case(
    scenario: &LoadedScenario,
    opts: &CaseOptions,
    trace_dir: Option<&Path>,
) -> Result<CaseResult, HarnessError> {
    let cfg = &scenario.config;
    let sim_model = &scenario.model;
    let master_seed = opts.seed.unwrap_or(cfg.seed);

    // Estimation model: reduced to the efficiency pair in coupled mode.
    let est_model = match cfg.degradation_mode() {
        gasgen_plant::DegradationMode::Coupled { k_c, k_t } => {
            sim_model.reduce_coupled(k_c, k_t)?
        }
        gasgen_plant::DegradationMode::Independent => sim_model.clone(),
    };
    let fm = FilterModel::new(&est_model)?;
    let n = fm.n();
    let n_x = est_model.dims.n_x;
    let n_theta = est_model.dims.n_theta;

    let load = cfg.load_params(sim_model.ss.pe);
    let pe_var = load.estimate_variance();
    let p_pe_t = cfg.placeholder_variance(&load);
    let pe_t = cfg.estimator.pe_t_dev;

    // Gain traces, once per assumed power-error variance.
    let p0 = initial_covariance(
        cfg.estimator.init_state_std,
        cfg.estimator.init_theta_std,
        n_x,
        n_theta,
    );
    let needs_pes = opts.estimators.contains(&EstimatorId::Pes);
    let needs_placeholder = opts
        .estimators
        .iter()
        .any(|e| matches!(e, EstimatorId::Pens | EstimatorId::Mpes));
    let pes_trace = if needs_pes {
        Some(gain_trace(&fm, &p0, &vec![pe_var; cfg.horizon])?)
    } else {
        None
    };
    let placeholder_trace = if needs_placeholder {
        Some(gain_trace(&fm, &p0, &vec![p_pe_t; cfg.horizon])?)
    } else {
        None
    };

    let kinds: Vec<EstimatorKind> = opts
        .estimators
        .iter()
        .map(|id| match id {
            EstimatorId::Pes => EstimatorKind::Pes,
            EstimatorId::Pens => EstimatorKind::Pens { pe_t, p_pe_t },
            EstimatorId::Mpes => EstimatorKind::Mpes { p_pe_t },
        })
        .collect();
    let gains: Vec<&[DMatrix<f64>]> = opts
        .estimators
        .iter()
        .map(|id| match id {
            EstimatorId::Pes => pes_trace.as_ref().expect("requested").gains.as_slice(),
            _ => placeholder_trace
                .as_ref()
                .expect("requested")
                .gains
                .as_slice(),
        })
        .collect();

    let coordinates = {
        let mut v = state_names(n_x);
        v.extend(health_param_names(n_theta));
        v
    };
    let param_names = health_param_names(n_theta);
    let map = theta_map(sim_model.dims.n_theta, n_theta);

    // Per-estimator posterior standard deviations for retained traces.
    let variance_trajs: Vec<Vec<DVector<f64>>> = if trace_dir.is_some() {
        opts.estimators
            .iter()
            .map(|id| {
                let trace = match id {
                    EstimatorId::Pes => pes_trace.as_ref().expect("requested"),
                    _ => placeholder_trace.as_ref().expect("requested"),
                };
                trace.posterior_covs.iter().map(|p| p.diagonal()).collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    let trace_columns = TraceColumns {
        state_names: state_names(n_x),
        param_names: param_names.clone(),
        coordinates: coordinates.clone(),
        estimators: opts
            .estimators
            .iter()
            .map(|e| e.slug().to_string())
            .collect(),
    };
    if let Some(dir) = trace_dir {
        std::fs::create_dir_all(dir).map_err(crate::error::io_err(dir))?;
    }

    let ctx = CaseContext {
        sim_model,
        fm: &fm,
        spec: RunSpec {
            class: HealthClass::Healthy, // replaced per run
            mode: cfg.degradation_mode(),
            horizon: cfg.horizon,
            ramp_start: cfg.ramp_start,
            ramp_end: cfg.ramp_end,
            load,
            pi: cfg.pi_params(),
        },
        master_seed,
        burn_in: cfg.burn_in,
        window: cfg.window,
        theta_map: &map,
        estimators: &opts.estimators,
        kinds,
        gains,
        trace: trace_dir.map(|dir| TraceShared {
            dir,
            columns: &trace_columns,
            variances: &variance_trajs,
        }),
    };

    // One descriptor per run, ordered: classes in fixed severity order,
    // run index within class.
    let descriptors: Vec<(usize, HealthClass)> = HealthClass::ALL
        .iter()
        .enumerate()
        .flat_map(|(c, class)| {
            (0..cfg.runs_per_class).map(move |r| (c * cfg.runs_per_class + r, *class))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| HarnessError::Config {
            message: format!("cannot build worker pool: {e}"),
        })?;
    let outcomes: Vec<Result<(RunPartial, Option<IndexEntry>), RunFailure>> = pool.install(|| {
        descriptors
            .par_iter()
            .map(|(run_id, class)| run_one(&ctx, *run_id, *class))
            .collect()
    });

    // Aggregate in run-id order, independent of worker scheduling.
    let mut agg = Aggregator::new(opts.estimators.len(), n, param_names.len());
    let mut failures = Vec::new();
    let mut index_entries = Vec::new();
    for outcome in &outcomes {
        match outcome {
            Ok((partial, entry)) => {
                agg.add(partial);
                if let Some(entry) = entry {
                    index_entries.push(entry.clone());
                }
            }
            Err(failure) => failures.push(RunFailureInfo {
                run_id: failure.run_id,
                class: failure.class.slug().to_string(),
                message: failure.message.clone(),
            }),
        }
    }

    let n_runs = descriptors.len();
    let n_failed = failures.len();
    if (n_failed as f64) > FAILURE_TOLERANCE * n_runs as f64 {
        return Err(HarnessError::TooManyFailures {
            failed: n_failed,
            total: n_runs,
            first: failures
                .first()
                .map(|f| format!("run {}: {}", f.run_id, f.message))
                .unwrap_or_default(),
        });
    }

    let rmse_rows = agg.rmse();
    let mut rmse = BTreeMap::new();
    for (e, id) in opts.estimators.iter().enumerate() {
        rmse.insert(id.slug().to_string(), rmse_rows[e].clone());
    }
    let mut improvement = BTreeMap::new();
    if let Some(base_idx) = opts.estimators.iter().position(|e| *e == EstimatorId::Pens) {
        for (e, id) in opts.estimators.iter().enumerate() {
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
    let classification = agg.classification(&opts.estimators, &param_names);

    if let Some(dir) = trace_dir {
        write_index(
            dir,
            &scenario.config_hash,
            master_seed,
            cfg,
            &trace_columns,
            &index_entries,
        )?;
    }

    Ok(CaseResult {
        provenance: Provenance {
            config_hash: scenario.config_hash.clone(),
            seed: master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            estimators: opts
                .estimators
                .iter()
                .map(|e| e.slug().to_string())
                .collect(),
        },
        case: cfg.case,
        horizon: cfg.horizon,
        burn_in: cfg.burn_in,
        window: cfg.window,
        runs_per_class: cfg.runs_per_class,
        n_runs,
        n_succeeded: agg.count(),
        n_failed,
        coordinates,
        health_parameters: param_names,
        rmse,
        improvement_vs_pens_pct: improvement,
        classification,
        failures,
    })
}

/// Diagonal initial belief covariance over the augmented state.
pub fn initial_covariance(
    state_std: f64,
    theta_std: f64,
    n_x: usize,
    n_theta: usize,
) -> DMatrix<f64> {
    let n = n_x + n_theta;
    DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else if i < n_x {
            state_std * state_std
        } else {
            theta_std * theta_std
        }
    })
}

/// Per-run seed: the master seed XOR the run's sweep position, expanded
/// by the RNG's seeding routine.
pub fn run_seed(master_seed: u64, run_id: usize) -> u64 {
    master_seed ^ run_id as u64
}

fn run_one(
    ctx: &CaseContext<'_>,
    run_id: usize,
    class: HealthClass,
) -> Result<(RunPartial, Option<IndexEntry>), RunFailure> {
    let fail = |message: String| RunFailure {
        run_id,
        class,
        message,
    };
    let seed = run_seed(ctx.master_seed, run_id);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut spec = ctx.spec.clone();
    spec.class = class;

    let record = simulate_run(ctx.sim_model, &spec, &mut rng).map_err(|e| fail(e.to_string()))?;
    let steps = filter_steps(&record.traj);

    let n = ctx.fm.n();
    let n_x = n - ctx.theta_map.len();
    let horizon = steps.len();
    let init_mean = DVector::zeros(n);

    let mut mse = Vec::with_capacity(ctx.estimators.len());
    let mut predicted = Vec::with_capacity(ctx.estimators.len());
    let mut means_per_estimator = Vec::with_capacity(ctx.estimators.len());
    for e in 0..ctx.estimators.len() {
        let means = mean_pass(ctx.kinds[e], ctx.fm, &init_mean, ctx.gains[e], &steps)
            .map_err(|err| fail(err.to_string()))?;

        let denom = (horizon - ctx.burn_in) as f64;
        let mut err_by_coord = vec![0.0; n];
        for (k, mean) in means.iter().enumerate().skip(ctx.burn_in) {
            for (i, err) in err_by_coord.iter_mut().enumerate() {
                let diff = mean[i] - truth_coord(&record, ctx.theta_map, n_x, k, i);
                *err += diff * diff;
            }
        }
        for err in &mut err_by_coord {
            *err /= denom;
        }
        mse.push(err_by_coord);

        let classes: Vec<HealthClass> = (0..ctx.theta_map.len())
            .map(|j| {
                let tail: Vec<f64> = means[horizon - ctx.window..]
                    .iter()
                    .map(|m| 1.0 + m[n_x + j])
                    .collect();
                classify_window(&tail, tail.len())
            })
            .collect::<Result<_, _>>()
            .map_err(|err| fail(err.to_string()))?;
        predicted.push(classes);
        means_per_estimator.push(means);
    }

    let actual: Vec<HealthClass> = (0..ctx.theta_map.len())
        .map(|j| {
            let tail: Vec<f64> = record.traj.theta[horizon - ctx.window..]
                .iter()
                .map(|th| 1.0 + th[ctx.theta_map[j]])
                .collect();
            classify_window(&tail, tail.len())
        })
        .collect::<Result<_, _>>()
        .map_err(|err| fail(err.to_string()))?;

    let entry = if let Some(trace) = &ctx.trace {
        let file = write_run_trace(
            trace.dir,
            run_id,
            class,
            &record,
            ctx.theta_map,
            &means_per_estimator,
            trace.variances,
            trace.columns,
        )
        .map_err(|err| fail(format!("trace: {err}")))?;
        Some(IndexEntry {
            file,
            run_id,
            seed,
            class: class.slug().to_string(),
            targets: record.plan.targets.clone(),
        })
    } else {
        None
    };

    Ok((
        RunPartial {
            mse,
            actual,
            predicted,
        },
        entry,
    ))
}

/// Truth value of estimated coordinate `i` at step `k`.
fn truth_coord(record: &RunRecord, theta_map: &[usize], n_x: usize, k: usize, i: usize) -> f64 {
    if i < n_x {
        record.traj.x[k][i]
    } else {
        record.traj.theta[k][theta_map[i - n_x]]
    }
}

/// Per-step filter inputs from simulated trajectories: the applied
/// control, the measurements, and the reported shaft power with its
/// honest variance.
pub fn filter_steps(traj: &gasgen_plant::Trajectories) -> Vec<StepInput> {
    (0..traj.u.len())
        .map(|k| StepInput {
            u: traj.u[k].clone(),
            y: traj.y[k].clone(),
            pe: ShaftPowerInput {
                mean: traj.pe_reported[k],
                var: traj.pe_reported_var,
            },
        })
        .collect()
}
