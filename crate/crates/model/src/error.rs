use thiserror::Error;

/// Structural problems detected while validating or assembling a model.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{name} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    DimensionMismatch {
        name: &'static str,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("{name} is not symmetric: max asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotSymmetric {
        name: &'static str,
        asymmetry: f64,
        tolerance: f64,
    },

    #[error(
        "{name} is not positive semidefinite: min eigenvalue {min_eigenvalue:e} below {bound:e}"
    )]
    NotPositiveSemidefinite {
        name: &'static str,
        min_eigenvalue: f64,
        bound: f64,
    },

    #[error("F[{row},{col}] is zero; every shaft-power coupling entry must be nonzero")]
    ZeroPowerCoupling { row: usize, col: usize },

    #[error("C row {row} is all zero; every measurement must see the state")]
    ZeroMeasurementRow { row: usize },

    #[error(
        "G column {col} is all zero; health parameter {col} would be invisible to the sensors"
    )]
    ZeroHealthColumn { col: usize },

    #[error("steady-state vector {name} has length {len}, expected {expected}")]
    SteadyStateLength {
        name: &'static str,
        len: usize,
        expected: usize,
    },

    #[error(
        "{what} requires a 4-parameter health vector (e^c, f^c, e^t, f^t); model has {n_theta}"
    )]
    UnsupportedHealthLayout { what: &'static str, n_theta: usize },

    #[error("coupling gain {name} = {value} must be finite and positive")]
    BadCouplingGain { name: &'static str, value: f64 },

    #[error("failed to read model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse model JSON: {0}")]
    Json(#[from] serde_json::Error),
}
