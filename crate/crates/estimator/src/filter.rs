//! Predict/update cores and the run loops built on them.
//!
//! The floating-point cores (`predict_cov`, `update_cov`, the mean kernels)
//! are shared by every entry point, so [`run_estimator`] (step-by-step,
//! beliefs plus diagnostics), [`gain_trace`] (covariances only, data
//! independent), and [`mean_pass`] (means only, gains given) all perform
//! identical arithmetic and agree bit for bit.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::{
    symmetrize, EstimatorError, EstimatorKind, FilterModel, GaussianBelief, ShaftPowerInput,
    StepDiagnostics, StepInput,
};

/// Condition-number limit for the innovation covariance. Updates refuse
/// above it rather than return silently garbage gains.
pub const COND_LIMIT: f64 = 1e12;

/// Time-update covariance: `A P A' + pe_var F F' + Q_aug`.
pub(crate) fn predict_cov(fm: &FilterModel, cov: &DMatrix<f64>, pe_var: f64) -> DMatrix<f64> {
    let a = &fm.aug.a;
    let mut out = a * cov * a.transpose() + &fm.aug.q;
    // rank-one shaft-power term
    let f = &fm.aug.f;
    for i in 0..fm.n() {
        for j in 0..fm.n() {
            out[(i, j)] += pe_var * f[i] * f[j];
        }
    }
    symmetrize(&mut out);
    out
}

/// Time-update mean into `out`: `A x + B u + pe_mean F`.
pub(crate) fn predict_mean_into(
    fm: &FilterModel,
    x: &DVector<f64>,
    u: &DVector<f64>,
    pe_mean: f64,
    out: &mut DVector<f64>,
) {
    out.gemv(1.0, &fm.aug.a, x, 0.0);
    out.gemv(1.0, &fm.aug.b, u, 1.0);
    out.axpy(pe_mean, &fm.aug.f, 1.0);
}

/// Innovation into `out`: `y - C x_prior - D u`.
pub(crate) fn innovation_into(
    fm: &FilterModel,
    x_prior: &DVector<f64>,
    u: &DVector<f64>,
    y: &DVector<f64>,
    out: &mut DVector<f64>,
) {
    out.copy_from(y);
    out.gemv(-1.0, &fm.aug.c, x_prior, 1.0);
    out.gemv(-1.0, &fm.d, u, 1.0);
}

/// Measurement-update covariance. Returns the gain and the Joseph-form
/// posterior `(I-KC) P (I-KC)' + K R K'`, refusing when the innovation
/// covariance is numerically singular (condition number at or above
/// [`COND_LIMIT`]).
pub(crate) fn update_cov(
    fm: &FilterModel,
    prior_cov: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>), EstimatorError> {
    let c = &fm.aug.c;
    let mut s = c * prior_cov * c.transpose() + &fm.r;
    symmetrize(&mut s);

    let eigs = s.symmetric_eigenvalues();
    let max_eig = eigs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min_eig = eigs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let cond = if min_eig > 0.0 {
        max_eig / min_eig
    } else {
        f64::INFINITY
    };
    // Negated form so a NaN condition number is rejected, not accepted.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(cond < COND_LIMIT) {
        return Err(EstimatorError::SingularInnovation {
            cond,
            limit: COND_LIMIT,
        });
    }
    let chol = Cholesky::new(s).ok_or(EstimatorError::SingularInnovation {
        cond,
        limit: COND_LIMIT,
    })?;

    // K' = S^-1 C P  (P symmetric), so K = (solve(C P))'
    let gain = chol.solve(&(c * prior_cov)).transpose();

    let posterior = joseph(fm, prior_cov, &gain);
    Ok((gain, posterior))
}

/// Joseph-form posterior covariance for a given gain.
pub(crate) fn joseph(
    fm: &FilterModel,
    prior_cov: &DMatrix<f64>,
    gain: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = fm.n();
    let ikc = DMatrix::identity(n, n) - gain * &fm.aug.c;
    let mut post = &ikc * prior_cov * ikc.transpose() + gain * &fm.r * gain.transpose();
    symmetrize(&mut post);
    post
}

/// Time update with explicit power mean/variance. The variance must be
/// finite and nonnegative.
pub fn predict(
    belief: &GaussianBelief,
    fm: &FilterModel,
    u: &DVector<f64>,
    pe_mean: f64,
    pe_var: f64,
) -> Result<GaussianBelief, EstimatorError> {
    if !(pe_var.is_finite() && pe_var >= 0.0) {
        return Err(EstimatorError::BadPowerVariance { var: pe_var });
    }
    if !pe_mean.is_finite() {
        return Err(EstimatorError::BadPowerMean { mean: pe_mean });
    }
    let mut mean = DVector::zeros(fm.n());
    predict_mean_into(fm, &belief.mean, u, pe_mean, &mut mean);
    Ok(GaussianBelief {
        mean,
        cov: predict_cov(fm, &belief.cov, pe_var),
    })
}

/// PES time update: accurate power mean with its reported variance.
pub fn predict_pes(
    belief: &GaussianBelief,
    fm: &FilterModel,
    u: &DVector<f64>,
    pe: &ShaftPowerInput,
) -> Result<GaussianBelief, EstimatorError> {
    pe.validate()?;
    predict(belief, fm, u, pe.mean, pe.var)
}

/// PENS time update: fixed placeholder mean and variance; any per-step
/// power information is ignored by construction.
pub fn predict_pens(
    belief: &GaussianBelief,
    fm: &FilterModel,
    u: &DVector<f64>,
    pe_t: f64,
    p_pe_t: f64,
) -> Result<GaussianBelief, EstimatorError> {
    EstimatorKind::Pens { pe_t, p_pe_t }.validate()?;
    predict(belief, fm, u, pe_t, p_pe_t)
}

/// MPES time update: accurate power mean, placeholder variance.
pub fn predict_mpes(
    belief: &GaussianBelief,
    fm: &FilterModel,
    u: &DVector<f64>,
    pe_mean: f64,
    p_pe_t: f64,
) -> Result<GaussianBelief, EstimatorError> {
    EstimatorKind::Mpes { p_pe_t }.validate()?;
    predict(belief, fm, u, pe_mean, p_pe_t)
}

/// Measurement update (Joseph form). Returns the posterior belief plus the
/// step diagnostics.
pub fn update(
    prior: &GaussianBelief,
    fm: &FilterModel,
    u: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<(GaussianBelief, StepDiagnostics), EstimatorError> {
    let (gain, posterior_cov) = update_cov(fm, &prior.cov)?;

    let mut innovation = DVector::zeros(fm.n_y());
    innovation_into(fm, &prior.mean, u, y, &mut innovation);
    let mut mean = prior.mean.clone();
    mean.gemv(1.0, &gain, &innovation, 1.0);

    let belief = GaussianBelief {
        mean,
        cov: posterior_cov.clone(),
    };
    let diag = StepDiagnostics {
        gain,
        prior_cov: prior.cov.clone(),
        posterior_cov,
        innovation,
    };
    Ok((belief, diag))
}

/// One full filter step: the variant's predict followed by [`update`].
pub fn step(
    kind: EstimatorKind,
    fm: &FilterModel,
    belief: &GaussianBelief,
    input: &StepInput,
) -> Result<(GaussianBelief, StepDiagnostics), EstimatorError> {
    let prior = predict(
        belief,
        fm,
        &input.u,
        kind.pe_mean(&input.pe),
        kind.pe_var(&input.pe),
    )?;
    update(&prior, fm, &input.u, &input.y)
}

/// Posterior beliefs and diagnostics for every step of a run.
#[derive(Debug, Clone)]
pub struct EstimatorRun {
    pub beliefs: Vec<GaussianBelief>,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Run one estimator variant over a full input sequence. Errors carry the
/// step index at which the filter failed.
pub fn run_estimator(
    kind: EstimatorKind,
    fm: &FilterModel,
    init: &GaussianBelief,
    steps: &[StepInput],
) -> Result<EstimatorRun, EstimatorError> {
    kind.validate()?;
    init.validate(fm.n())?;
    check_steps(fm, steps)?;

    let mut beliefs = Vec::with_capacity(steps.len());
    let mut diagnostics = Vec::with_capacity(steps.len());
    let mut belief = init.clone();
    for (k, input) in steps.iter().enumerate() {
        let (next, diag) =
            step(kind, fm, &belief, input).map_err(|e| EstimatorError::at_step(k, e))?;
        belief = next;
        beliefs.push(belief.clone());
        diagnostics.push(diag);
    }
    Ok(EstimatorRun {
        beliefs,
        diagnostics,
    })
}

fn check_steps(fm: &FilterModel, steps: &[StepInput]) -> Result<(), EstimatorError> {
    let n_u = fm.aug.b.ncols();
    let n_y = fm.n_y();
    for (index, s) in steps.iter().enumerate() {
        if s.u.len() != n_u || s.y.len() != n_y {
            return Err(EstimatorError::StepDimensionMismatch {
                index,
                u_len: s.u.len(),
                n_u,
                y_len: s.y.len(),
                n_y,
            });
        }
        // Power inputs are deliberately not validated here: PENS must run
        // untouched by whatever the power channel carries. The variants
        // that consume it surface bad values through `predict`.
    }
    Ok(())
}

/// Gain/covariance sequence of a run: everything about the filter that does
/// not depend on the data.
#[derive(Debug, Clone)]
pub struct GainTrace {
    pub gains: Vec<DMatrix<f64>>,
    pub prior_covs: Vec<DMatrix<f64>>,
    pub posterior_covs: Vec<DMatrix<f64>>,
}

/// Precompute the gain/covariance sequence for a per-step power-variance
/// schedule. Performs the same arithmetic as the covariance half of
/// [`run_estimator`], so the sequences agree bit for bit.
pub fn gain_trace(
    fm: &FilterModel,
    init_cov: &DMatrix<f64>,
    pe_vars: &[f64],
) -> Result<GainTrace, EstimatorError> {
    GaussianBelief::from_cov(init_cov.clone()).validate(fm.n())?;

    let mut gains = Vec::with_capacity(pe_vars.len());
    let mut prior_covs = Vec::with_capacity(pe_vars.len());
    let mut posterior_covs = Vec::with_capacity(pe_vars.len());
    let mut cov = init_cov.clone();
    for (k, &pe_var) in pe_vars.iter().enumerate() {
        if !(pe_var.is_finite() && pe_var >= 0.0) {
            return Err(EstimatorError::at_step(
                k,
                EstimatorError::BadPowerVariance { var: pe_var },
            ));
        }
        let prior = predict_cov(fm, &cov, pe_var);
        let (gain, posterior) =
            update_cov(fm, &prior).map_err(|e| EstimatorError::at_step(k, e))?;
        cov = posterior.clone();
        gains.push(gain);
        prior_covs.push(prior);
        posterior_covs.push(posterior);
    }
    Ok(GainTrace {
        gains,
        prior_covs,
        posterior_covs,
    })
}

/// Replay the mean recursion for a run under precomputed gains. Applies the
/// variant's power-mean policy (PENS substitutes its placeholder); power
/// variances in `steps` are not consulted. Returns the posterior mean at
/// every step.
pub fn mean_pass(
    kind: EstimatorKind,
    fm: &FilterModel,
    init_mean: &DVector<f64>,
    gains: &[DMatrix<f64>],
    steps: &[StepInput],
) -> Result<Vec<DVector<f64>>, EstimatorError> {
    kind.validate()?;
    check_steps(fm, steps)?;
    if gains.len() != steps.len() {
        return Err(EstimatorError::LengthMismatch {
            what: "gain sequence",
            expected: steps.len(),
            got: gains.len(),
        });
    }
    if init_mean.len() != fm.n() {
        return Err(EstimatorError::LengthMismatch {
            what: "initial mean",
            expected: fm.n(),
            got: init_mean.len(),
        });
    }

    let mut out = Vec::with_capacity(steps.len());
    let mut x = init_mean.clone();
    let mut xp = DVector::zeros(fm.n());
    let mut innovation = DVector::zeros(fm.n_y());
    for (k, input) in steps.iter().enumerate() {
        predict_mean_into(fm, &x, &input.u, kind.pe_mean(&input.pe), &mut xp);
        innovation_into(fm, &xp, &input.u, &input.y, &mut innovation);
        x.copy_from(&xp);
        x.gemv(1.0, &gains[k], &innovation, 1.0);
        out.push(x.clone());
    }
    Ok(out)
}
