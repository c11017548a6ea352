//! The structural-guarantee suite: run every analytic check the estimator
//! crate provides against the configured scenario, stress the gain
//! equivalence across randomized models, and confront the analytic error
//! covariances with a Monte Carlo estimate on self-consistent truth.

use gasgen_estimator::theorems::{
    check_error_covariance_ordering, check_gain_equivalence, check_placeholder_insensitivity,
    ErrorCovarianceOrderingReport, GainEquivalenceReport, PlaceholderInsensitivityReport,
    GAIN_EQUIVALENCE_TOL,
};
use gasgen_estimator::{
    cee_with_gains, gain_trace, mean_pass, EstimatorKind, FilterModel, GaussianBelief,
    ShaftPowerInput, StepInput,
};
use gasgen_model::{Dims, GasGenModel, SteadyState};
use gasgen_plant::{simulate_consistent, ConsistentSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{LoadedScenario, Provenance};
use crate::error::HarnessError;
use crate::runner::{filter_steps, initial_covariance};

/// Placeholder-variance ladder: decades above the load profile's
/// stationary variance probed by the insensitivity check.
pub const LADDER_DECADES: [i32; 7] = [2, 4, 6, 8, 10, 12, 14];

/// Steps excluded from the strict part of the covariance-ordering check
/// while the shared initial covariance still dominates both recursions.
pub const ORDERING_BURN_IN: usize = 11;

/// Relative tolerance for Monte Carlo versus analytic error covariance.
pub const MC_REL_TOL: f64 = 0.05;

// Seed-domain tags: every consumer of the master seed works in its own
// XOR domain so streams never collide across suite components.
const SCENARIO_TAG: u64 = 0x7363_656e_0000_0000;
const RANDOM_MODEL_TAG: u64 = 0x726d_646c_0000_0000;
const MC_TAG: u64 = 0x6d63_7275_0000_0000;

/// Suite sizing knobs.
#[derive(Debug, Clone)]
pub struct TheoremOptions {
    /// Monte Carlo runs behind the covariance comparison.
    pub mc_runs: usize,
    /// Randomized models for the gain-equivalence stress.
    pub random_models: usize,
    /// Filter steps per randomized model.
    pub random_model_steps: usize,
    /// Worker threads for the Monte Carlo part; 0 lets the runtime choose.
    pub jobs: usize,
}

impl Default for TheoremOptions {
    fn default() -> Self {
        TheoremOptions {
            mc_runs: 10_000,
            random_models: 100,
            random_model_steps: 180,
            jobs: 0,
        }
    }
}

/// Gain equivalence across randomized valid models.
#[derive(Debug, Clone, Serialize)]
pub struct RandomizedEquivalence {
    pub n_models: usize,
    pub steps_per_model: usize,
    pub max_gain_dev: f64,
    pub max_cov_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Monte Carlo versus analytic error covariance at one probe step.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeComparison {
    pub step: usize,
    /// Worst per-coordinate relative deviation of the Monte Carlo error
    /// variance from the power-informed filter's analytic diagonal.
    pub max_rel_dev_pes: f64,
    /// Same for the placeholder-gain filter against its achieved-error
    /// recursion.
    pub max_rel_dev_mpes: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CeeVsMonteCarlo {
    pub n_runs: usize,
    pub tol: f64,
    pub probes: Vec<ProbeComparison>,
    pub pass: bool,
}

/// Everything the suite verified, with an overall verdict.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremSuiteReport {
    pub provenance: Provenance,
    pub gain_equivalence: GainEquivalenceReport,
    pub gain_equivalence_randomized: RandomizedEquivalence,
    pub placeholder_insensitivity: PlaceholderInsensitivityReport,
    pub error_covariance_ordering: ErrorCovarianceOrderingReport,
    pub cee_vs_monte_carlo: CeeVsMonteCarlo,
    pub pass: bool,
}

/// Run the whole structural-guarantee suite for a scenario.
pub fn run_theorem_suite(
    scenario: &LoadedScenario,
    opts: &TheoremOptions,
) -> Result<TheoremSuiteReport, HarnessError> {
    let cfg = &scenario.config;
    let model = &scenario.model;
    let fm = FilterModel::new(model)?;
    let n_x = model.dims.n_x;
    let n_theta = model.dims.n_theta;

    let load = cfg.load_params(model.ss.pe);
    let pe_var = load.estimate_variance();
    let p_pe_t = cfg.placeholder_variance(&load);
    let pe_t = cfg.estimator.pe_t_dev;
    let p0 = initial_covariance(
        cfg.estimator.init_state_std,
        cfg.estimator.init_theta_std,
        n_x,
        n_theta,
    );
    let init = GaussianBelief {
        mean: DVector::zeros(fm.n()),
        cov: p0.clone(),
    };
    let consistent = ConsistentSpec {
        horizon: cfg.horizon,
        load,
        pi: cfg.pi_params(),
        init_state_std: cfg.estimator.init_state_std,
        init_theta_std: cfg.estimator.init_theta_std,
    };

    // One self-consistent trajectory provides the scenario-shaped data for
    // the data-dependent checks.
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ SCENARIO_TAG);
    let traj = simulate_consistent(model, &consistent, &mut rng)?;
    let steps = filter_steps(&traj);

    let gain_equivalence = check_gain_equivalence(&fm, &fm, &init, &steps, pe_t, p_pe_t)?;
    let gain_equivalence_randomized =
        randomized_equivalence(cfg.seed, opts.random_models, opts.random_model_steps)?;

    let ladder: Vec<f64> = LADDER_DECADES
        .iter()
        .map(|d| consistent.load.profile_variance() * 10f64.powi(*d))
        .collect();
    let placeholder_insensitivity =
        check_placeholder_insensitivity(&fm, &init, &steps, pe_t, &ladder)?;

    let error_covariance_ordering =
        check_error_covariance_ordering(&fm, &p0, cfg.horizon, pe_var, p_pe_t, ORDERING_BURN_IN)?;

    let cee_vs_monte_carlo =
        cee_vs_monte_carlo(model, &fm, &consistent, &p0, pe_var, p_pe_t, cfg.seed, opts)?;

    let pass = gain_equivalence.pass
        && gain_equivalence_randomized.pass
        && placeholder_insensitivity.pass
        && error_covariance_ordering.pass
        && cee_vs_monte_carlo.pass;
    Ok(TheoremSuiteReport {
        provenance: Provenance {
            config_hash: scenario.config_hash.clone(),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            estimators: vec!["pes".into(), "pens".into(), "mpes".into()],
        },
        gain_equivalence,
        gain_equivalence_randomized,
        placeholder_insensitivity,
        error_covariance_ordering,
        cee_vs_monte_carlo,
        pass,
    })
}

/// A structurally valid gas generator model with randomized parameters:
/// stable scalar rotor dynamics, four health parameters, all validation
/// invariants (noise PSD, nonzero power path, no blind sensor rows, no
/// unobservable health columns) satisfied by construction.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R) -> GasGenModel {
    let mut model = GasGenModel {
        dims: Dims {
            n_x: 1,
            n_u: 1,
            n_y: 4,
            n_theta: 4,
        },
        a: DMatrix::zeros(1, 1),
        b: DMatrix::zeros(1, 1),
        c: DMatrix::zeros(4, 1),
        d: DMatrix::zeros(4, 1),
        e: DMatrix::zeros(1, 4),
        f: DMatrix::zeros(1, 1),
        g: DMatrix::zeros(4, 4),
        q: DMatrix::zeros(1, 1),
        r: DMatrix::zeros(4, 4),
        qh: DMatrix::zeros(4, 4),
        ss: SteadyState {
            x: DVector::from_vec(vec![24_000.0]),
            u: DVector::from_vec(vec![1.0]),
            y: DVector::from_vec(vec![24_000.0, 300.0, 3_500.0, 900.0]),
            theta: DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0]),
            pe: 50_000.0,
        },
    };
    model.a[(0, 0)] = rng.gen_range(0.90..0.998);
    model.b[(0, 0)] = rng.gen_range(500.0..8_000.0);
    model.f[(0, 0)] = signed(rng, 0.05, 0.5);
    for i in 0..4 {
        model.c[(i, 0)] = signed(rng, 0.01, 1.5);
        model.d[(i, 0)] = signed(rng, 10.0, 9_000.0);
        model.e[(0, i)] = signed(rng, 5.0, 500.0);
        for j in 0..4 {
            model.g[(i, j)] = signed(rng, 10.0, 1_500.0);
        }
    }
    model.q[(0, 0)] = {
        let std = rng.gen_range(0.001..0.01) * model.ss.x[0];
        std * std
    };
    for i in 0..4 {
        let std = rng.gen_range(0.001..0.01) * model.ss.y[i];
        model.r[(i, i)] = std * std;
    }
    let qh_std = rng.gen_range(2e-5..2e-4);
    for j in 0..4 {
        model.qh[(j, j)] = qh_std * qh_std;
    }
    model
}

/// Magnitude drawn from `[lo, hi)` with a random sign, bounded away from
/// zero so randomized models never have blind sensors or silent health
/// parameters.
fn signed<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let mag = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Arbitrary finite filter inputs for structural checks: the gain
/// equivalence must hold whatever data the filters see.
fn random_steps<R: Rng + ?Sized>(
    model: &GasGenModel,
    n_steps: usize,
    rng: &mut R,
) -> Vec<StepInput> {
    (0..n_steps)
        .map(|_| StepInput {
            u: DVector::from_fn(model.dims.n_u, |_, _| {
                0.3 * rng.sample::<f64, _>(StandardNormal)
            }),
            y: DVector::from_fn(model.dims.n_y, |i, _| {
                0.01 * model.ss.y[i] * rng.sample::<f64, _>(StandardNormal)
            }),
            pe: ShaftPowerInput {
                mean: 2_000.0 * rng.sample::<f64, _>(StandardNormal),
                var: rng.gen_range(100.0..1_000.0),
            },
        })
        .collect()
}

/// Gain-equivalence stress across randomized models, each with its own
/// arbitrary data, placeholder settings, and initial covariance.
pub fn randomized_equivalence(
    master_seed: u64,
    n_models: usize,
    n_steps: usize,
) -> Result<RandomizedEquivalence, HarnessError> {
    let mut max_gain_dev: f64 = 0.0;
    let mut max_cov_dev: f64 = 0.0;
    for m in 0..n_models {
        let mut rng = ChaCha12Rng::seed_from_u64(master_seed ^ RANDOM_MODEL_TAG ^ m as u64);
        let model = random_model(&mut rng);
        model.validate()?;
        let fm = FilterModel::new(&model)?;
        let steps = random_steps(&model, n_steps, &mut rng);
        let init = GaussianBelief {
            mean: DVector::zeros(fm.n()),
            cov: initial_covariance(
                10f64.powf(rng.gen_range(0.0..3.0)),
                10f64.powf(rng.gen_range(-3.0..0.0)),
                model.dims.n_x,
                model.dims.n_theta,
            ),
        };
        let pe_t = 1_000.0 * rng.sample::<f64, _>(StandardNormal);
        let p_pe_t = 10f64.powf(rng.gen_range(6.0..11.0));
        let report = check_gain_equivalence(&fm, &fm, &init, &steps, pe_t, p_pe_t)?;
        max_gain_dev = max_gain_dev.max(report.max_gain_dev);
        max_cov_dev = max_cov_dev.max(report.max_cov_dev);
    }
    Ok(RandomizedEquivalence {
        n_models,
        steps_per_model: n_steps,
        max_gain_dev,
        max_cov_dev,
        tol: GAIN_EQUIVALENCE_TOL,
        pass: max_gain_dev < GAIN_EQUIVALENCE_TOL && max_cov_dev < GAIN_EQUIVALENCE_TOL,
    })
}

#[allow(clippy::too_many_arguments)]
fn cee_vs_monte_carlo(
    model: &GasGenModel,
    fm: &FilterModel,
    consistent: &ConsistentSpec,
    p0: &DMatrix<f64>,
    pe_var: f64,
    p_pe_t: f64,
    master_seed: u64,
    opts: &TheoremOptions,
) -> Result<CeeVsMonteCarlo, HarnessError> {
    let horizon = consistent.horizon;
    let n = fm.n();
    let n_x = model.dims.n_x;
    let probes: Vec<usize> = if horizon >= 2 {
        vec![horizon / 2 - 1, horizon - 1]
    } else {
        vec![horizon - 1]
    };

    let pes_trace = gain_trace(fm, p0, &vec![pe_var; horizon])?;
    let placeholder_trace = gain_trace(fm, p0, &vec![p_pe_t; horizon])?;
    let cee_mpes = cee_with_gains(fm, p0, &placeholder_trace.gains, &vec![pe_var; horizon])?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| HarnessError::Config {
            message: format!("cannot build worker pool: {e}"),
        })?;
    // Per run and probe: squared estimation errors per coordinate for the
    // power-informed and placeholder-gain filters.
    type RunErrors = Vec<(Vec<f64>, Vec<f64>)>;
    let init_mean = DVector::zeros(n);
    let partials: Vec<Result<RunErrors, HarnessError>> = pool.install(|| {
        (0..opts.mc_runs)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha12Rng::seed_from_u64(master_seed ^ MC_TAG ^ r as u64);
                let traj = simulate_consistent(model, consistent, &mut rng)?;
                let steps = filter_steps(&traj);
                let pes_means =
                    mean_pass(EstimatorKind::Pes, fm, &init_mean, &pes_trace.gains, &steps)?;
                let mpes_means = mean_pass(
                    EstimatorKind::Mpes { p_pe_t },
                    fm,
                    &init_mean,
                    &placeholder_trace.gains,
                    &steps,
                )?;
                let errors = probes
                    .iter()
                    .map(|&p| {
                        let sq = |means: &[DVector<f64>]| -> Vec<f64> {
                            (0..n)
                                .map(|i| {
                                    let truth = if i < n_x {
                                        traj.x[p][i]
                                    } else {
                                        traj.theta[p][i - n_x]
                                    };
                                    let diff = means[p][i] - truth;
                                    diff * diff
                                })
                                .collect()
                        };
                        (sq(&pes_means), sq(&mpes_means))
                    })
                    .collect();
                Ok(errors)
            })
            .collect()
    });

    let mut pes_sums = vec![vec![0.0; n]; probes.len()];
    let mut mpes_sums = vec![vec![0.0; n]; probes.len()];
    for partial in partials {
        let errors = partial?;
        for (pi, (pes_sq, mpes_sq)) in errors.iter().enumerate() {
            for i in 0..n {
                pes_sums[pi][i] += pes_sq[i];
                mpes_sums[pi][i] += mpes_sq[i];
            }
        }
    }

    let runs = opts.mc_runs as f64;
    let mut probe_reports = Vec::with_capacity(probes.len());
    for (pi, &p) in probes.iter().enumerate() {
        let rel_dev = |sums: &[f64], analytic: &DMatrix<f64>| -> f64 {
            (0..n)
                .map(|i| (sums[i] / runs / analytic[(i, i)] - 1.0).abs())
                .fold(0.0, f64::max)
        };
        probe_reports.push(ProbeComparison {
            step: p,
            max_rel_dev_pes: rel_dev(&pes_sums[pi], &pes_trace.posterior_covs[p]),
            max_rel_dev_mpes: rel_dev(&mpes_sums[pi], &cee_mpes[p]),
        });
    }
    let pass = probe_reports
        .iter()
        .all(|p| p.max_rel_dev_pes <= MC_REL_TOL && p.max_rel_dev_mpes <= MC_REL_TOL);
    Ok(CeeVsMonteCarlo {
        n_runs: opts.mc_runs,
        tol: MC_REL_TOL,
        probes: probe_reports,
        pass,
    })
}
