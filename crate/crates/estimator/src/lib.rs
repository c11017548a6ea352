//! Augmented-state Kalman estimators for gas-generator health tracking.
//!
//! Three estimator variants run on the same `[state; health]` augmented
//! model and differ only in how they treat the electrical shaft power `Pe`
//! entering through `F`:
//!
//! * **PES** — consumes a per-step power estimate: accurate mean plus its
//!   error variance `P^Pe`.
//! * **PENS** — has no power information: a fixed placeholder mean `PeT`
//!   with a deliberately huge variance `P^PeT`.
//! * **MPES** — a diagnostic hybrid: accurate mean like PES, placeholder
//!   variance `P^PeT` like PENS. Its covariance arithmetic is identical to
//!   PENS (means never feed covariances in a linear filter), which is the
//!   lever behind the equivalence and ordering checks in [`theorems`].
//!
//! The covariance/gain sequences are data-independent, so [`gain_trace`]
//! precomputes them once and [`mean_pass`] replays means cheaply per run —
//! the Monte Carlo fast path. Both are built from the same floating-point
//! cores as [`predict`]/[`update`], so the fused paths reproduce the
//! step-by-step API bit for bit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use gasgen_model::{AugmentedModel, GasGenModel, ModelError};

mod cee;
mod error;
mod filter;
mod split;
pub mod theorems;

pub use cee::{cee_recursion_mpes, cee_recursion_pes, cee_with_gains};
pub use error::EstimatorError;
pub use filter::{
    gain_trace, mean_pass, predict, predict_mpes, predict_pens, predict_pes, run_estimator, step,
    update, EstimatorRun, GainTrace, COND_LIMIT,
};
pub use split::gain_trace_split;

/// Gaussian state belief: mean and covariance of the augmented state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianBelief {
    /// Zero-mean belief with the given covariance.
    pub fn from_cov(cov: DMatrix<f64>) -> GaussianBelief {
        GaussianBelief {
            mean: DVector::zeros(cov.nrows()),
            cov,
        }
    }

    /// Check dimensions against `n`, symmetry, and positive
    /// semidefiniteness (relative tolerance 1e-10).
    pub fn validate(&self, n: usize) -> Result<(), EstimatorError> {
        if self.mean.len() != n || self.cov.nrows() != n || self.cov.ncols() != n {
            return Err(EstimatorError::BeliefDimensionMismatch {
                mean_len: self.mean.len(),
                cov_rows: self.cov.nrows(),
                cov_cols: self.cov.ncols(),
                expected: n,
            });
        }
        let scale = self.cov.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let tol = gasgen_model::PSD_REL_TOL * scale;
        let asym = gasgen_model::max_asymmetry(&self.cov);
        if asym > tol {
            return Err(EstimatorError::CovarianceAsymmetric {
                asymmetry: asym,
                tolerance: tol,
            });
        }
        let min_eig = gasgen_model::min_symmetric_eigenvalue(&self.cov);
        let bound = -gasgen_model::PSD_REL_TOL * self.cov.trace();
        if min_eig < bound {
            return Err(EstimatorError::CovarianceNotPsd {
                min_eigenvalue: min_eig,
                bound,
            });
        }
        Ok(())
    }
}

/// Per-step shaft-power information handed to the estimators, in deviation
/// watts: the estimate mean and its error variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShaftPowerInput {
    pub mean: f64,
    pub var: f64,
}

impl ShaftPowerInput {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.var.is_finite() && self.var >= 0.0) {
            return Err(EstimatorError::BadPowerVariance { var: self.var });
        }
        if !self.mean.is_finite() {
            return Err(EstimatorError::BadPowerMean { mean: self.mean });
        }
        Ok(())
    }
}

/// Which estimator variant to run, carrying the placeholder configuration
/// where one applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// Power-informed: per-step `(mean, var)` from [`ShaftPowerInput`].
    Pes,
    /// No power information: fixed placeholder mean and variance.
    Pens { pe_t: f64, p_pe_t: f64 },
    /// Accurate per-step mean, placeholder variance.
    Mpes { p_pe_t: f64 },
}

impl EstimatorKind {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        let p = match *self {
            EstimatorKind::Pes => return Ok(()),
            EstimatorKind::Pens { pe_t, p_pe_t } => {
                if !pe_t.is_finite() {
                    return Err(EstimatorError::BadPowerMean { mean: pe_t });
                }
                p_pe_t
            }
            EstimatorKind::Mpes { p_pe_t } => p_pe_t,
        };
        if !(p.is_finite() && p > 0.0) {
            return Err(EstimatorError::BadPlaceholderVariance { p_pe_t: p });
        }
        Ok(())
    }

    /// Power mean this variant feeds into the prediction.
    pub fn pe_mean(&self, input: &ShaftPowerInput) -> f64 {
        match *self {
            EstimatorKind::Pes | EstimatorKind::Mpes { .. } => input.mean,
            EstimatorKind::Pens { pe_t, .. } => pe_t,
        }
    }

    /// Power variance this variant feeds into the prediction.
    pub fn pe_var(&self, input: &ShaftPowerInput) -> f64 {
        match *self {
            EstimatorKind::Pes => input.var,
            EstimatorKind::Pens { p_pe_t, .. } | EstimatorKind::Mpes { p_pe_t } => p_pe_t,
        }
    }
}

/// One step of filter inputs: known control, measurement vector, and the
/// shaft-power information (ignored entirely by PENS).
#[derive(Debug, Clone, PartialEq)]
pub struct StepInput {
    pub u: DVector<f64>,
    pub y: DVector<f64>,
    pub pe: ShaftPowerInput,
}

/// Numerical byproducts of a single update, kept for diagnostics, traces,
/// and the theorem checks.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub gain: DMatrix<f64>,
    pub prior_cov: DMatrix<f64>,
    pub posterior_cov: DMatrix<f64>,
    pub innovation: DVector<f64>,
}

/// Everything a filter needs from the plant model: the augmented dynamics
/// plus the direct feedthrough and measurement-noise covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterModel {
    pub aug: AugmentedModel,
    pub d: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl FilterModel {
    pub fn new(model: &GasGenModel) -> Result<FilterModel, ModelError> {
        Ok(FilterModel {
            aug: model.augment()?,
            d: model.d.clone(),
            r: model.r.clone(),
        })
    }

    /// Augmented state dimension.
    pub fn n(&self) -> usize {
        self.aug.n
    }

    pub fn n_y(&self) -> usize {
        self.r.nrows()
    }
}

/// Force exact symmetry after covariance arithmetic.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
