use gasgen_model::ModelError;
use thiserror::Error;

/// Errors from scenario construction and closed-loop simulation.
#[derive(Debug, Error)]
pub enum PlantError {
    /// The underlying model failed validation.
    #[error(transparent)]
    Model(#[from] ModelError),

    /// The proportional-integral speed governor actuates every control
    /// input from the matching state component, so it needs square
    /// input/state dimensions.
    #[error("PI governor requires one actuator per state, got {n_u} inputs for {n_x} states")]
    ControllerShape { n_u: usize, n_x: usize },

    /// A controller gain or limit is unusable.
    #[error("controller parameter {what} = {value} is not usable")]
    BadControllerParam { what: &'static str, value: f64 },

    /// A load-profile parameter is out of range.
    #[error("load parameter {what} = {value} is not usable")]
    BadLoadParam { what: &'static str, value: f64 },

    /// The degradation ramp window must fit inside the horizon.
    #[error("degradation ramp [{start}, {end}) does not fit a horizon of {horizon} steps")]
    BadRampWindow {
        start: usize,
        end: usize,
        horizon: usize,
    },

    /// A coupling gain must be a positive finite number.
    #[error("coupling gain {what} = {value} must be finite and positive")]
    BadCouplingGain { what: &'static str, value: f64 },

    /// Coupled degradation only applies to the four-parameter layout
    /// (compressor and turbine efficiency/flow pairs).
    #[error("coupled degradation needs the 4-parameter health layout, model has {n_theta}")]
    CoupledLayout { n_theta: usize },

    /// A noise covariance could not be factored for sampling.
    #[error("{name} covariance is neither positive definite nor diagonal; cannot sample noise")]
    NoiseNotSimulable { name: &'static str },

    /// The closed loop left the neighbourhood where the linearized model
    /// is meaningful; the run is unusable.
    #[error("state {coord} diverged at step {step}: |{value:.3e}| exceeds bound {bound:.3e}")]
    Diverged {
        step: usize,
        coord: usize,
        value: f64,
        bound: f64,
    },
}
