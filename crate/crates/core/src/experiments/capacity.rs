use serde::Serialize;

use crate::error::DomainError;
use crate::inflation::{payload_from_normals, vertical_contacts};
use crate::model::{FrictionParams, RobotSpec, TubeProfile, STANDARD_GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Capability {
    pub capable: bool,
    /// Static holding capacity minus the supported weight (N).
    pub margin_n: f64,
    pub total_normal_n: f64,
    /// Total mass the contacts could hold (kg).
    pub capacity_kg: f64,
}

/// Whether the robot at mid-tube, stood vertically, can hold `total_mass_kg`.
pub fn vertical_capability(
    robot: &RobotSpec,
    tube: &TubeProfile,
    actuation_mm: f64,
    friction: &FrictionParams,
    total_mass_kg: f64,
) -> Result<Capability, DomainError> {
    let contacts = vertical_contacts(robot, actuation_mm, tube, 0.5 * tube.length_mm)?;
    let total = contacts.total_normal_n();
    let margin = friction.mu_s * total - total_mass_kg * STANDARD_GRAVITY;
    Ok(Capability {
        capable: margin >= 0.0,
        margin_n: margin,
        total_normal_n: total,
        capacity_kg: payload_from_normals([total], friction.mu_s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::diameter_of;

    fn onset_tube() -> TubeProfile {
        TubeProfile::straight(diameter_of(&RobotSpec::default(), 0.0).unwrap(), 200.0).with_inclination(90.0)
    }

    #[test]
    fn no_interference_cannot_hold() {
        let r = RobotSpec::default();
        let tube = TubeProfile::straight(30.0, 200.0).with_inclination(90.0);
        let c = vertical_capability(&r, &tube, 1.0, &FrictionParams::default(), 2.0).unwrap();
        assert!(!c.capable);
        assert!((c.margin_n + 2.0 * 9.81).abs() < 1e-12);
    }

    #[test]
    fn boundary_at_rated_payload() {
        let r = RobotSpec::default();
        let c = vertical_capability(&r, &onset_tube(), 3.0, &FrictionParams::default(), 56.7 / 9.81).unwrap();
        assert!(c.margin_n.abs() < 1e-6, "{}", c.margin_n);
        assert!((c.capacity_kg - 5.78).abs() < 0.005);
    }

    #[test]
    fn lighter_mass_leaves_margin() {
        let r = RobotSpec::default();
        let c = vertical_capability(&r, &onset_tube(), 3.0, &FrictionParams::default(), 3.0).unwrap();
        assert!(c.capable);
        assert!((c.margin_n - 27.27).abs() < 0.01, "{}", c.margin_n);
    }
}
