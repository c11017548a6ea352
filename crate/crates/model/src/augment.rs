//! Health-parameter state augmentation.
//!
//! The estimators track `[x; θ]` jointly, modeling the health parameters as
//! a random walk. Stacking the plant equations gives
//!
//! ```text
//! A_aug = [A  E]    B_aug = [B]    F_aug = [F]    C_aug = [C  G]
//!         [0  I]            [0]            [0]
//! Q_aug = blkdiag(Q, Qh)
//! ```

use nalgebra::{DMatrix, DVector};

use crate::{GasGenModel, ModelError};

/// The joint `[state; health]` model the Kalman estimators run on.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedModel {
    /// Augmented state dimension, `n_x + n_theta`.
    pub n: usize,
    pub n_x: usize,
    pub n_theta: usize,
    /// `[A E; 0 I]`
    pub a: DMatrix<f64>,
    /// `[B; 0]`
    pub b: DMatrix<f64>,
    /// `[C G]`
    pub c: DMatrix<f64>,
    /// `[F; 0]` as a column vector (shaft power enters as a scalar).
    pub f: DVector<f64>,
    /// `blkdiag(Q, Qh)`
    pub q: DMatrix<f64>,
}

/// Assemble the augmented model from a validated plant model. Validation is
/// re-run first so errors name the offending matrix.
pub fn augment(model: &GasGenModel) -> Result<AugmentedModel, ModelError> {
    model.validate()?;

    let nx = model.dims.n_x;
    let nth = model.dims.n_theta;
    let n = nx + nth;

    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (nx, nx)).copy_from(&model.a);
    a.view_mut((0, nx), (nx, nth)).copy_from(&model.e);
    a.view_mut((nx, nx), (nth, nth))
        .copy_from(&DMatrix::identity(nth, nth));

    let mut b = DMatrix::zeros(n, model.dims.n_u);
    b.view_mut((0, 0), (nx, model.dims.n_u)).copy_from(&model.b);

    let mut c = DMatrix::zeros(model.dims.n_y, n);
    c.view_mut((0, 0), (model.dims.n_y, nx)).copy_from(&model.c);
    c.view_mut((0, nx), (model.dims.n_y, nth))
        .copy_from(&model.g);

    let mut f = DVector::zeros(n);
    for i in 0..nx {
        f[i] = model.f[(i, 0)];
    }

    let mut q = DMatrix::zeros(n, n);
    q.view_mut((0, 0), (nx, nx)).copy_from(&model.q);
    q.view_mut((nx, nx), (nth, nth)).copy_from(&model.qh);

    Ok(AugmentedModel {
        n,
        n_x: nx,
        n_theta: nth,
        a,
        b,
        c,
        f,
        q,
    })
}
