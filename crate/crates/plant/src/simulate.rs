//! Closed-loop simulation of the gas generator in deviation coordinates.
//!
//! Time convention, shared with the estimator stack: at step `k` the
//! governor acts on the previous state, the plant transitions under that
//! input, the current degradation `theta[k]` and load `pe[k]`, and the
//! sensors then measure the new state:
//!
//! ```text
//! u[k] = governor(x[k-1])
//! x[k] = A x[k-1] + B u[k] + E theta[k] + F pe[k] + w[k]
//! y[k] = C x[k] + D u[k] + G theta[k] + v[k]
//! ```
//!
//! A filter therefore predicts step `k` with `(u[k], pe[k])` and updates
//! with `y[k]`; its posterior at `k` estimates `x[k]` and `theta[k]`.

use gasgen_fdi::HealthClass;
use gasgen_model::GasGenModel;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::controller::{PiController, PiParams};
use crate::degradation::{DegradationMode, DegradationPlan};
use crate::load::{report_load, sample_load, LoadParams};
use crate::PlantError;

/// How far (in multiples of the operating-point magnitude) a state
/// deviation may wander before the run is declared divergent: outside
/// this neighbourhood the linearization has no physical meaning.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

/// Everything needed to simulate one degraded run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub class: HealthClass,
    pub mode: DegradationMode,
    pub horizon: usize,
    pub ramp_start: usize,
    pub ramp_end: usize,
    pub load: LoadParams,
    pub pi: PiParams,
}

/// Simulated signal histories, all in deviation coordinates. Index `k`
/// holds the post-transition state the step-`k` measurement sees.
#[derive(Debug, Clone)]
pub struct Trajectories {
    pub x: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub theta: Vec<DVector<f64>>,
    pub pe_true: Vec<f64>,
    pub pe_reported: Vec<f64>,
    /// Variance of `pe_reported - pe_true`, the honest feed for a
    /// power-informed estimator.
    pub pe_reported_var: f64,
}

/// One degraded Monte Carlo run: the sampled degradation schedule plus
/// the signals it produced.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub plan: DegradationPlan,
    pub traj: Trajectories,
}

/// Simulate one degraded run.
///
/// Draw order (frozen so a seed fully determines the run): degradation
/// targets, load dwells/levels, load jitter, power-report errors, process
/// noise, measurement noise.
pub fn simulate_run<R: Rng + ?Sized>(
    model: &GasGenModel,
    spec: &RunSpec,
    rng: &mut R,
) -> Result<RunRecord, PlantError> {
    model.validate()?;
    spec.load.validate()?;
    let plan = DegradationPlan::sample(
        spec.class,
        spec.mode,
        model.dims.n_theta,
        spec.ramp_start,
        spec.ramp_end,
        spec.horizon,
        rng,
    )?;
    let theta = plan.trajectories(spec.horizon);

    let pe_true = sample_load(&spec.load, spec.horizon, rng)?;
    let pe_reported = report_load(&spec.load, &pe_true, rng);
    let (w, v) = sample_noise(model, spec.horizon, rng)?;

    let x0 = DVector::zeros(model.dims.n_x);
    let (x, u, y) = closed_loop(model, &theta, &pe_true, &w, &v, spec.pi, x0)?;
    Ok(RunRecord {
        plan,
        traj: Trajectories {
            x,
            u,
            y,
            theta,
            pe_true,
            pe_reported,
            pe_reported_var: spec.load.estimate_variance(),
        },
    })
}

/// Scenario for a statistically self-consistent run: the truth follows
/// exactly the stochastic model an augmented-state filter assumes —
/// health parameters do a random walk with the model's health noise, and
/// the initial state/health deviations are drawn from the filter's
/// initial belief. Used to validate analytic error covariances against
/// Monte Carlo averages.
#[derive(Debug, Clone)]
pub struct ConsistentSpec {
    pub horizon: usize,
    pub load: LoadParams,
    pub pi: PiParams,
    /// Standard deviation of each initial state deviation.
    pub init_state_std: f64,
    /// Standard deviation of each initial health deviation.
    pub init_theta_std: f64,
}

/// Simulate one self-consistent run.
///
/// Draw order (frozen): load dwells/levels, load jitter, initial health,
/// health random-walk increments, initial state, process noise,
/// measurement noise, power-report errors.
pub fn simulate_consistent<R: Rng + ?Sized>(
    model: &GasGenModel,
    spec: &ConsistentSpec,
    rng: &mut R,
) -> Result<Trajectories, PlantError> {
    model.validate()?;
    spec.load.validate()?;
    for (what, value) in [
        ("init_state_std", spec.init_state_std),
        ("init_theta_std", spec.init_theta_std),
    ] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(PlantError::BadControllerParam { what, value });
        }
    }

    let n_theta = model.dims.n_theta;
    let pe_true = sample_load(&spec.load, spec.horizon, rng)?;

    // Health truth: random walk driven by the model's own health noise.
    let qh_factor = noise_factor("health noise", &model.qh)?;
    let mut theta = Vec::with_capacity(spec.horizon);
    theta.push(spec.init_theta_std * standard_vector(n_theta, rng));
    for k in 1..spec.horizon {
        let step = &qh_factor * standard_vector(n_theta, rng);
        theta.push(&theta[k - 1] + step);
    }

    let x0 = spec.init_state_std * standard_vector(model.dims.n_x, rng);
    let (w, v) = sample_noise(model, spec.horizon, rng)?;
    let (x, u, y) = closed_loop(model, &theta, &pe_true, &w, &v, spec.pi, x0)?;

    let pe_reported = report_load(&spec.load, &pe_true, rng);
    Ok(Trajectories {
        x,
        u,
        y,
        theta,
        pe_true,
        pe_reported,
        pe_reported_var: spec.load.estimate_variance(),
    })
}

/// Left factor `L` with `L L' = M`, for sampling correlated noise:
/// Cholesky when the covariance is positive definite, elementwise square
/// roots when it is diagonal (zeros allowed).
fn noise_factor(name: &'static str, m: &DMatrix<f64>) -> Result<DMatrix<f64>, PlantError> {
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Ok(chol.unpack());
    }
    let diagonal_only = m
        .row_iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, v)| i == j || *v == 0.0));
    if diagonal_only && m.diagonal().iter().all(|d| *d >= 0.0) {
        Ok(DMatrix::from_diagonal(&m.diagonal().map(f64::sqrt)))
    } else {
        Err(PlantError::NoiseNotSimulable { name })
    }
}

fn standard_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Process noise then measurement noise, one vector per step each.
#[allow(clippy::type_complexity)]
fn sample_noise<R: Rng + ?Sized>(
    model: &GasGenModel,
    horizon: usize,
    rng: &mut R,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>), PlantError> {
    let q_factor = noise_factor("process noise", &model.q)?;
    let r_factor = noise_factor("measurement noise", &model.r)?;
    let w = (0..horizon)
        .map(|_| &q_factor * standard_vector(model.dims.n_x, rng))
        .collect();
    let v = (0..horizon)
        .map(|_| &r_factor * standard_vector(model.dims.n_y, rng))
        .collect();
    Ok((w, v))
}

/// Run the governed plant over a horizon of prepared inputs and noises.
#[allow(clippy::type_complexity)]
fn closed_loop(
    model: &GasGenModel,
    theta: &[DVector<f64>],
    pe_true: &[f64],
    w: &[DVector<f64>],
    v: &[DVector<f64>],
    pi: PiParams,
    x0: DVector<f64>,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>, Vec<DVector<f64>>), PlantError> {
    let n_u = model.dims.n_u;
    let n_x = model.dims.n_x;
    if n_u != n_x {
        return Err(PlantError::ControllerShape { n_u, n_x });
    }
    let horizon = theta.len();
    let mut controller = PiController::new(pi, n_x)?;
    let bounds: Vec<f64> = model
        .ss
        .x
        .iter()
        .map(|x_ss| DIVERGENCE_FACTOR * (x_ss.abs() + 1.0))
        .collect();

    let mut xs = Vec::with_capacity(horizon);
    let mut us = Vec::with_capacity(horizon);
    let mut ys = Vec::with_capacity(horizon);
    let mut x = x0;
    for k in 0..horizon {
        let u = controller.control(&x);
        x = &model.a * &x
            + &model.b * &u
            + &model.e * &theta[k]
            + model.f.column(0) * pe_true[k]
            + &w[k];
        for (coord, (value, bound)) in x.iter().zip(&bounds).enumerate() {
            // Negated form so a NaN state is reported as divergence.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(value.abs() <= *bound) {
                return Err(PlantError::Diverged {
                    step: k,
                    coord,
                    value: *value,
                    bound: *bound,
                });
            }
        }
        let y = &model.c * &x + &model.d * &u + &model.g * &theta[k] + &v[k];
        xs.push(x.clone());
        us.push(u);
        ys.push(y);
    }
    Ok((xs, us, ys))
}
