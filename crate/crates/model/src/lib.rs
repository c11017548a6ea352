//! Linear gas-generator model for an all-electric APU.
//!
//! The plant is a discrete-time linearization around a steady operating
//! point, written in deviation coordinates:
//!
//! ```text
//! x_{k+1} = A x_k + B u_k + E θ_k + F Pe_k + w_k
//! y_k     = C x_k + D u_k + G θ_k + v_k
//! ```
//!
//! where `x` is the shaft-speed deviation, `u` the fuel-command deviation,
//! `Pe` the electrical shaft-power deviation, and `θ` the health-parameter
//! deviations (efficiency / flow-capability multipliers minus one). The
//! crate owns structure validation, the health-parameter state augmentation
//! used by the estimators, deviation/absolute coordinate conversion, and the
//! JSON model-file format.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

mod augment;
mod error;
mod io;

pub use augment::{augment, AugmentedModel};
pub use error::ModelError;

/// Problem dimensions carried alongside the matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n_x: usize,
    pub n_u: usize,
    pub n_y: usize,
    pub n_theta: usize,
}

/// Steady-state references used to move between deviation and absolute
/// coordinates. `theta` holds the healthy multipliers (all ones).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub x: DVector<f64>,
    pub u: DVector<f64>,
    pub y: DVector<f64>,
    pub theta: DVector<f64>,
    pub pe: f64,
}

/// A bundle of plant signals, either in deviation or absolute coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Signals {
    pub x: DVector<f64>,
    pub u: DVector<f64>,
    pub y: DVector<f64>,
    pub theta: DVector<f64>,
    pub pe: f64,
}

/// Discrete-time linear gas-generator model with health-parameter and
/// shaft-power coupling, plus the noise covariances the estimators assume.
#[derive(Debug, Clone, PartialEq)]
pub struct GasGenModel {
    pub dims: Dims,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub qh: DMatrix<f64>,
    pub ss: SteadyState,
}

/// Relative tolerance for symmetry and positive-semidefiniteness checks.
pub const PSD_REL_TOL: f64 = 1e-10;

/// Largest asymmetry `max|M - M^T|` of a square matrix.
pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Smallest eigenvalue of a (nearly) symmetric matrix, computed on its
/// symmetrized form. An empty matrix has no eigenvalues and reports
/// `+inf`, which keeps it vacuously positive semidefinite.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

fn check_shape(
    name: &'static str,
    m: &DMatrix<f64>,
    rows: usize,
    cols: usize,
) -> Result<(), ModelError> {
    if m.nrows() != rows || m.ncols() != cols {
        return Err(ModelError::DimensionMismatch {
            name,
            rows: m.nrows(),
            cols: m.ncols(),
            expected_rows: rows,
            expected_cols: cols,
        });
    }
    Ok(())
}

fn check_covariance(name: &'static str, m: &DMatrix<f64>) -> Result<(), ModelError> {
    let scale = m.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let tol = PSD_REL_TOL * scale;
    let asym = max_asymmetry(m);
    if asym > tol {
        return Err(ModelError::NotSymmetric {
            name,
            asymmetry: asym,
            tolerance: tol,
        });
    }
    let min_eig = min_symmetric_eigenvalue(m);
    let bound = -PSD_REL_TOL * m.trace();
    if min_eig < bound {
        return Err(ModelError::NotPositiveSemidefinite {
            name,
            min_eigenvalue: min_eig,
            bound,
        });
    }
    Ok(())
}

fn check_vector_len(
    name: &'static str,
    v: &DVector<f64>,
    expected: usize,
) -> Result<(), ModelError> {
    if v.len() != expected {
        return Err(ModelError::SteadyStateLength {
            name,
            len: v.len(),
            expected,
        });
    }
    Ok(())
}

impl GasGenModel {
    /// Check every structural invariant: matrix shapes against `dims`,
    /// symmetric positive-semidefinite noise covariances, a fully nonzero
    /// shaft-power coupling, no blind measurement row, and no health
    /// parameter invisible to every sensor.
    pub fn validate(&self) -> Result<(), ModelError> {
        let Dims {
            n_x,
            n_u,
            n_y,
            n_theta,
        } = self.dims;

        check_shape("A", &self.a, n_x, n_x)?;
        check_shape("B", &self.b, n_x, n_u)?;
        check_shape("C", &self.c, n_y, n_x)?;
        check_shape("D", &self.d, n_y, n_u)?;
        check_shape("E", &self.e, n_x, n_theta)?;
        check_shape("F", &self.f, n_x, 1)?;
        check_shape("G", &self.g, n_y, n_theta)?;
        check_shape("Q", &self.q, n_x, n_x)?;
        check_shape("R", &self.r, n_y, n_y)?;
        check_shape("Qh", &self.qh, n_theta, n_theta)?;

        check_covariance("Q", &self.q)?;
        check_covariance("R", &self.r)?;
        check_covariance("Qh", &self.qh)?;

        for i in 0..n_x {
            if self.f[(i, 0)] == 0.0 {
                return Err(ModelError::ZeroPowerCoupling { row: i, col: 0 });
            }
        }
        for i in 0..n_y {
            if self.c.row(i).iter().all(|&v| v == 0.0) {
                return Err(ModelError::ZeroMeasurementRow { row: i });
            }
        }
        for j in 0..n_theta {
            if self.g.column(j).iter().all(|&v| v == 0.0) {
                return Err(ModelError::ZeroHealthColumn { col: j });
            }
        }

        check_vector_len("x", &self.ss.x, n_x)?;
        check_vector_len("u", &self.ss.u, n_u)?;
        check_vector_len("y", &self.ss.y, n_y)?;
        check_vector_len("theta", &self.ss.theta, n_theta)?;

        Ok(())
    }

    /// Assemble the health-augmented model (see [`augment`]).
    pub fn augment(&self) -> Result<AugmentedModel, ModelError> {
        augment(self)
    }

    /// Shift deviation-coordinate signals to absolute coordinates by adding
    /// the steady-state references.
    pub fn deviation_to_absolute(&self, s: &Signals) -> Signals {
        Signals {
            x: &s.x + &self.ss.x,
            u: &s.u + &self.ss.u,
            y: &s.y + &self.ss.y,
            theta: &s.theta + &self.ss.theta,
            pe: s.pe + self.ss.pe,
        }
    }

    /// Shift absolute-coordinate signals to deviations from steady state.
    /// Exact inverse of [`GasGenModel::deviation_to_absolute`].
    pub fn absolute_to_deviation(&self, s: &Signals) -> Signals {
        Signals {
            x: &s.x - &self.ss.x,
            u: &s.u - &self.ss.u,
            y: &s.y - &self.ss.y,
            theta: &s.theta - &self.ss.theta,
            pe: s.pe - self.ss.pe,
        }
    }

    /// Collapse the four-parameter health vector to the two efficiencies by
    /// tying each flow capability to its efficiency, `f - 1 = k (e - 1)`.
    ///
    /// The reduced model drives the state and the sensors through
    /// `E' = [E_ec + k_c E_fc, E_et + k_t E_ft]` (same for `G`), so a truth
    /// trajectory obeying the coupling is reproduced exactly. Requires the
    /// standard `[e^c, f^c, e^t, f^t]` layout.
    pub fn reduce_coupled(&self, k_c: f64, k_t: f64) -> Result<GasGenModel, ModelError> {
        if self.dims.n_theta != 4 {
            return Err(ModelError::UnsupportedHealthLayout {
                what: "coupled reduction",
                n_theta: self.dims.n_theta,
            });
        }
        if !(k_c.is_finite() && k_c > 0.0) {
            return Err(ModelError::BadCouplingGain {
                name: "k_c",
                value: k_c,
            });
        }
        if !(k_t.is_finite() && k_t > 0.0) {
            return Err(ModelError::BadCouplingGain {
                name: "k_t",
                value: k_t,
            });
        }

        let combine = |m: &DMatrix<f64>| {
            let mut out = DMatrix::zeros(m.nrows(), 2);
            for i in 0..m.nrows() {
                out[(i, 0)] = m[(i, 0)] + k_c * m[(i, 1)];
                out[(i, 1)] = m[(i, 2)] + k_t * m[(i, 3)];
            }
            out
        };

        let mut qh = DMatrix::zeros(2, 2);
        qh[(0, 0)] = self.qh[(0, 0)];
        qh[(1, 1)] = self.qh[(2, 2)];

        let reduced = GasGenModel {
            dims: Dims {
                n_theta: 2,
                ..self.dims
            },
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
            e: combine(&self.e),
            f: self.f.clone(),
            g: combine(&self.g),
            q: self.q.clone(),
            r: self.r.clone(),
            qh,
            ss: SteadyState {
                theta: DVector::from_vec(vec![self.ss.theta[0], self.ss.theta[2]]),
                ..self.ss.clone()
            },
        };
        reduced.validate()?;
        Ok(reduced)
    }
}
