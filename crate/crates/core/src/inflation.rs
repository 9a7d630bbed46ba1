//! Mechanical inflation: actuation ↔ free diameter, preload, and capacity.

use serde::{Deserialize, Serialize};

use crate::contact::{contact_set, ContactState};
use crate::error::DomainError;
use crate::model::{FrictionParams, RobotSpec, TubeProfile, STANDARD_GRAVITY};

/// Movable-end travel together with the free diameter it produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflationState {
    pub actuation_mm: f64,
    pub free_diameter_mm: f64,
}

impl InflationState {
    pub fn new(robot: &RobotSpec, actuation_mm: f64) -> Result<Self, DomainError> {
        Ok(Self {
            actuation_mm,
            free_diameter_mm: diameter_of(robot, actuation_mm)?,
        })
    }
}

/// Index of the segment used for `x` in an ascending list, extrapolating
/// with the first/last segment outside the covered range.
fn segment(xs: impl Iterator<Item = f64> + Clone, x: f64) -> usize {
    let n = xs.clone().count();
    let upper = xs.take_while(|&v| v <= x).count();
    upper.clamp(1, n - 1) - 1
}

fn lerp(y0: f64, y1: f64, t: f64) -> f64 {
    // Exact at both ends.
    y0 * (1.0 - t) + y1 * t
}

/// Free robot diameter (mm) at `actuation_mm`, piecewise linear through the
/// inflation table and linearly extrapolated beyond it.
pub fn diameter_of(robot: &RobotSpec, actuation_mm: f64) -> Result<f64, DomainError> {
    if !actuation_mm.is_finite() {
        return Err(DomainError::NonFinite {
            what: "actuation_mm",
            value: actuation_mm,
        });
    }
    if actuation_mm < 0.0 {
        return Err(DomainError::Negative {
            what: "actuation_mm",
            value: actuation_mm,
        });
    }
    let table = &robot.inflation_table;
    let i = segment(table.iter().map(|r| r.0), actuation_mm);
    let (a0, d0) = table[i];
    let (a1, d1) = table[i + 1];
    Ok(lerp(d0, d1, (actuation_mm - a0) / (a1 - a0)))
}

/// Inverse of [`diameter_of`], clamped to non-negative actuation.
pub fn actuation_for_diameter(robot: &RobotSpec, diameter_mm: f64) -> Result<f64, DomainError> {
    if !diameter_mm.is_finite() {
        return Err(DomainError::NonFinite {
            what: "diameter_mm",
            value: diameter_mm,
        });
    }
    let table = &robot.inflation_table;
    let i = segment(table.iter().map(|r| r.1), diameter_mm);
    let (a0, d0) = table[i];
    let (a1, d1) = table[i + 1];
    Ok(lerp(a0, a1, (diameter_mm - d0) / (d1 - d0)).max(0.0))
}

/// Normal force (N) one slider receives from inflation against a wall of
/// diameter `tube_diameter_mm`: zero up to contact onset, then linear.
pub fn inflator_normal_force(
    robot: &RobotSpec,
    actuation_mm: f64,
    tube_diameter_mm: f64,
) -> Result<f64, DomainError> {
    if !(tube_diameter_mm > 0.0) {
        return Err(DomainError::NonPositive {
            what: "tube_diameter_mm",
            value: tube_diameter_mm,
        });
    }
    let onset = actuation_for_diameter(robot, tube_diameter_mm)?;
    let excess = (actuation_mm - onset).max(0.0);
    Ok(robot.inflator_stiffness_n_per_mm * robot.inflator_share() * excess)
}

/// Diameter ratio δ = d_robot / d_tube.
pub fn diameter_ratio(robot_diameter_mm: f64, tube_diameter_mm: f64) -> Result<f64, DomainError> {
    for (what, value) in [
        ("robot_diameter_mm", robot_diameter_mm),
        ("tube_diameter_mm", tube_diameter_mm),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(DomainError::NonPositive { what, value });
        }
    }
    Ok(robot_diameter_mm / tube_diameter_mm)
}

/// Total mass (kg) whose weight equals the static friction of the given normal forces.
pub fn payload_from_normals(normals_n: impl IntoIterator<Item = f64>, mu_s: f64) -> f64 {
    mu_s * normals_n.into_iter().fold(0.0, |a, n| a + n) / STANDARD_GRAVITY
}

/// Total supportable mass (kg, robot included) with the robot at `station_z_mm`
/// in `tube` stood vertically.
pub fn payload_capacity(
    robot: &RobotSpec,
    actuation_mm: f64,
    tube: &TubeProfile,
    station_z_mm: f64,
    mu_s: f64,
) -> Result<f64, DomainError> {
    let contacts = vertical_contacts(robot, actuation_mm, tube, station_z_mm)?;
    Ok(payload_from_normals(contacts.normal_forces(), mu_s))
}

/// Contact state with the tube stood vertically and no heterogeneity.
pub(crate) fn vertical_contacts(
    robot: &RobotSpec,
    actuation_mm: f64,
    tube: &TubeProfile,
    station_z_mm: f64,
) -> Result<ContactState, DomainError> {
    let vertical = tube.clone().with_inclination(90.0);
    let inflation = InflationState::new(robot, actuation_mm)?;
    let friction = FrictionParams::default();
    contact_set(robot, &inflation, &vertical, station_z_mm, &friction)
}
