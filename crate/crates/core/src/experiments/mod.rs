//! Bench protocols: efficiency, correlation, sweeps, load comparison,
//! calibration and vertical capability.

mod calibrate;
mod capacity;
mod load;
pub mod scenarios;
mod sweep;

pub use calibrate::{calibrate, Bounds, CalibrationResult, CalibrationTarget, Residual, Target};
pub use capacity::{vertical_capability, Capability};
pub use load::{load_comparison, LoadComparison, LoadResult};
pub use scenarios::{Protocol, Scenario};
pub use sweep::{sweep_delta, GridPoint, RowStatus, SweepResult, SweepRow};

use serde::Serialize;

use crate::dynamics::CycleResult;
use crate::error::{DomainError, ExperimentError};

/// Locomotion efficiency (%) of a run from `x_initial_mm` to `x_final_mm`.
pub fn efficiency(x_initial_mm: f64, x_final_mm: f64, x_theoretical_mm: f64) -> Result<f64, DomainError> {
    if !(x_theoretical_mm > 0.0) || !x_theoretical_mm.is_finite() {
        return Err(DomainError::NonPositive {
            what: "x_theoretical_mm",
            value: x_theoretical_mm,
        });
    }
    Ok((x_final_mm - x_initial_mm).abs() / x_theoretical_mm * 100.0)
}

/// Pearson product-moment correlation of `(x, y)` samples.
pub fn pearson(samples: &[(f64, f64)]) -> Result<f64, ExperimentError> {
    if samples.len() < 2 {
        return Err(ExperimentError::UndefinedCorrelation("fewer than 2 samples"));
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in samples {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(ExperimentError::UndefinedCorrelation("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Outcome of the measured cycles of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub cycles: Vec<CycleResult>,
    pub net_mm: f64,
    pub theoretical_mm: f64,
    pub eta_percent: f64,
    pub slip_events: usize,
    pub delta: f64,
}

impl Measurement {
    /// Absolute net displacement of each measured cycle.
    pub fn per_cycle_progress_mm(&self) -> Vec<f64> {
        self.cycles.iter().map(|c| c.net_tube_displacement_mm.abs()).collect()
    }
}
