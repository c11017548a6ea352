use std::fmt;

use serde::{Deserialize, Serialize};

use crate::FdiError;

/// Lower edge of the healthy band: efficiency/flow multipliers at or above
/// this are considered nominal wear.
pub const HEALTHY_MIN: f64 = 0.98;
/// Lower edge of the minor-fault band.
pub const MINOR_MIN: f64 = 0.96;
/// Lower edge of the medium-fault band; anything below is severe.
pub const MEDIUM_MIN: f64 = 0.94;

/// Severity class of a health-parameter multiplier.
///
/// The multiplier space partitions into four half-open bands, each closed
/// at its lower edge, so every finite value maps to exactly one class:
///
/// ```text
/// severe (-inf, 0.94) | medium [0.94, 0.96) | minor [0.96, 0.98) | healthy [0.98, inf)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HealthClass {
    Healthy,
    MinorFault,
    MediumFault,
    SevereFault,
}

impl HealthClass {
    /// All classes, in increasing severity. Index order is shared with
    /// [`crate::ConfusionMatrix`] rows and columns.
    pub const ALL: [HealthClass; 4] = [
        HealthClass::Healthy,
        HealthClass::MinorFault,
        HealthClass::MediumFault,
        HealthClass::SevereFault,
    ];

    /// Class of a single multiplier value. The value must be finite; use
    /// [`classify_window`] for trajectory data that needs checking.
    pub fn classify(multiplier: f64) -> HealthClass {
        assert!(
            multiplier.is_finite(),
            "health multiplier must be finite, got {multiplier}"
        );
        if multiplier >= HEALTHY_MIN {
            HealthClass::Healthy
        } else if multiplier >= MINOR_MIN {
            HealthClass::MinorFault
        } else if multiplier >= MEDIUM_MIN {
            HealthClass::MediumFault
        } else {
            HealthClass::SevereFault
        }
    }

    /// Half-open multiplier band `[lo, hi)` covered by this class. The
    /// severe band extends to negative infinity, the healthy band to
    /// positive infinity.
    pub fn interval(self) -> (f64, f64) {
        match self {
            HealthClass::Healthy => (HEALTHY_MIN, f64::INFINITY),
            HealthClass::MinorFault => (MINOR_MIN, HEALTHY_MIN),
            HealthClass::MediumFault => (MEDIUM_MIN, MINOR_MIN),
            HealthClass::SevereFault => (f64::NEG_INFINITY, MEDIUM_MIN),
        }
    }

    /// Position in [`HealthClass::ALL`], used as the confusion-matrix index.
    pub fn index(self) -> usize {
        match self {
            HealthClass::Healthy => 0,
            HealthClass::MinorFault => 1,
            HealthClass::MediumFault => 2,
            HealthClass::SevereFault => 3,
        }
    }

    /// Short lowercase name for file names and table columns.
    pub fn slug(self) -> &'static str {
        match self {
            HealthClass::Healthy => "healthy",
            HealthClass::MinorFault => "minor",
            HealthClass::MediumFault => "medium",
            HealthClass::SevereFault => "severe",
        }
    }
}

impl fmt::Display for HealthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            HealthClass::Healthy => "Healthy",
            HealthClass::MinorFault => "Minor fault",
            HealthClass::MediumFault => "Medium fault",
            HealthClass::SevereFault => "Severe fault",
        };
        f.write_str(name)
    }
}

/// Classify a health-parameter trajectory by the mean of its final
/// `window` samples. Averaging over a settled window suppresses estimator
/// noise that single-sample classification would pass through.
pub fn classify_window(trajectory: &[f64], window: usize) -> Result<HealthClass, FdiError> {
    if window == 0 || trajectory.len() < window {
        return Err(FdiError::EmptyWindow {
            window,
            len: trajectory.len(),
        });
    }
    let tail = &trajectory[trajectory.len() - window..];
    let mean = tail.iter().sum::<f64>() / window as f64;
    if !mean.is_finite() {
        return Err(FdiError::NotFinite {
            what: "windowed health-multiplier mean",
        });
    }
    Ok(HealthClass::classify(mean))
}
