//! Proportional-integral speed governor holding the gas generator at its
//! operating point while loads and degradation push it away.

use nalgebra::DVector;

use crate::PlantError;

/// PI gains and actuator limit. Gains act elementwise: control input `i`
/// regulates state component `i` (deviation coordinates), so the plant
/// must have one actuator per state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiParams {
    pub kp: f64,
    pub ki: f64,
    /// Saturation bound on each control-input deviation. In calibrated
    /// scenarios the loop operates far inside this limit; it exists to
    /// keep a mis-specified run from feeding unbounded commands back into
    /// the plant.
    pub u_limit: f64,
}

impl PiParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let checks: [(&'static str, f64, bool); 3] = [
            ("kp", self.kp, self.kp.is_finite() && self.kp >= 0.0),
            ("ki", self.ki, self.ki.is_finite() && self.ki >= 0.0),
            (
                "u_limit",
                self.u_limit,
                self.u_limit.is_finite() && self.u_limit > 0.0,
            ),
        ];
        for (what, value, ok) in checks {
            if !ok {
                return Err(PlantError::BadControllerParam { what, value });
            }
        }
        Ok(())
    }
}

/// Discrete PI regulator state.
#[derive(Debug, Clone)]
pub struct PiController {
    params: PiParams,
    integral: DVector<f64>,
}

impl PiController {
    pub fn new(params: PiParams, n: usize) -> Result<Self, PlantError> {
        params.validate()?;
        Ok(PiController {
            params,
            integral: DVector::zeros(n),
        })
    }

    /// One control update from the current state deviation:
    /// `u = -(kp * x + ki * integral)` with the state folded into the
    /// integral first. Saturated components clamp to the limit and skip
    /// their integral update (conditional anti-windup), so the integrator
    /// cannot wind up against the stop.
    pub fn control(&mut self, x: &DVector<f64>) -> DVector<f64> {
        let p = self.params;
        DVector::from_fn(x.len(), |i, _| {
            let candidate = self.integral[i] + x[i];
            let raw = -(p.kp * x[i] + p.ki * candidate);
            if raw.abs() <= p.u_limit {
                self.integral[i] = candidate;
                raw
            } else {
                p.u_limit.copysign(raw)
            }
        })
    }
}
