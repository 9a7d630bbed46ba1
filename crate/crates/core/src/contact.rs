//! Which sliders touch the wall, and how hard.
//!
//! Two regimes at the robot station:
//! * free diameter ≥ tube diameter: every slider is pressed by its inflator,
//!   and the bottom arc additionally carries the robot weight;
//! * free diameter < tube diameter: the robot rests on the bottom arc only
//!   (nothing at all in a vertical tube).

use serde::Serialize;

use crate::error::DomainError;
use crate::inflation::{diameter_ratio, inflator_normal_force, InflationState};
use crate::model::{FrictionParams, RobotSpec, TubeProfile};
use crate::rng;

/// Half-width of the arc around the bottom that can carry the robot weight.
pub const BOTTOM_ARC_DEG: f64 = 60.0;

/// Normal load on one slider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliderContact {
    pub slider: usize,
    pub group: usize,
    pub angle_deg: f64,
    pub in_contact: bool,
    pub inflation_n: f64,
    pub gravity_n: f64,
}

impl SliderContact {
    pub fn normal_force_n(&self) -> f64 {
        self.inflation_n + self.gravity_n
    }
}

/// Per-slider contact forces at one axial station.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactState {
    pub sliders: Vec<SliderContact>,
    pub station_z_mm: f64,
    pub local_tube_diameter_mm: f64,
    pub free_diameter_mm: f64,
    pub inclination_deg: f64,
}

impl ContactState {
    pub fn delta(&self) -> f64 {
        self.free_diameter_mm / self.local_tube_diameter_mm
    }

    /// Normal forces of the sliders in contact.
    pub fn normal_forces(&self) -> impl Iterator<Item = f64> + '_ {
        self.sliders
            .iter()
            .filter(|s| s.in_contact)
            .map(SliderContact::normal_force_n)
    }

    pub fn contact_count(&self) -> usize {
        self.sliders.iter().filter(|s| s.in_contact).count()
    }

    pub fn total_normal_n(&self) -> f64 {
        self.normal_forces().fold(0.0, |a, n| a + n)
    }

    /// Σ N·cos θ over contacting sliders, θ measured from the bottom.
    pub fn vertical_support_n(&self) -> f64 {
        self.sliders
            .iter()
            .filter(|s| s.in_contact)
            .map(|s| s.normal_force_n() * s.angle_deg.to_radians().cos())
            .fold(0.0, |a, v| a + v)
    }

    /// Contacting sliders per group.
    pub fn contacts_per_group(&self, n_groups: usize) -> Vec<usize> {
        let mut counts = vec![0; n_groups];
        for s in self.sliders.iter().filter(|s| s.in_contact) {
            counts[s.group] += 1;
        }
        counts
    }
}

/// Tube diameter at axial position `z_mm`.
pub fn local_tube_diameter(tube: &TubeProfile, z_mm: f64) -> Result<f64, DomainError> {
    tube.diameter_at(z_mm)
}

/// Angular distance from the bottom of the tube, in [0, 180].
fn from_bottom_deg(angle_deg: f64) -> f64 {
    let a = angle_deg.rem_euclid(360.0);
    a.min(360.0 - a)
}

/// Sliders inside the bottom arc.
pub fn bottom_arc(robot: &RobotSpec) -> Vec<usize> {
    robot
        .slider_angles_deg
        .iter()
        .enumerate()
        .filter(|(_, &a)| from_bottom_deg(a) <= BOTTOM_ARC_DEG + 1e-9)
        .map(|(i, _)| i)
        .collect()
}

/// Equal-magnitude gravity share for each bottom-arc slider such that the
/// vertical components sum to the weight component normal to the axis.
fn gravity_share(robot: &RobotSpec, arc: &[usize], inclination_deg: f64) -> f64 {
    if inclination_deg >= 90.0 || arc.is_empty() {
        return 0.0;
    }
    let lateral = robot.weight_n() * inclination_deg.to_radians().cos();
    let support: f64 = arc
        .iter()
        .map(|&i| robot.slider_angles_deg[i].to_radians().cos())
        .sum();
    lateral / support
}

/// Heterogeneity multipliers; `phase` only matters with per-phase jitter.
pub fn heterogeneity_multipliers(friction: &FrictionParams, n_sliders: usize, phase: u64) -> Vec<f64> {
    let seed = if friction.per_phase_jitter {
        rng::derive_seed(friction.seed, phase)
    } else {
        friction.seed
    };
    rng::slider_multipliers(seed, friction.heterogeneity_sigma, n_sliders)
}

/// Contact state of `robot` at `station_z_mm` with multipliers drawn once per run.
pub fn contact_set(
    robot: &RobotSpec,
    inflation: &InflationState,
    tube: &TubeProfile,
    station_z_mm: f64,
    friction: &FrictionParams,
) -> Result<ContactState, DomainError> {
    let multipliers = heterogeneity_multipliers(friction, robot.n_sliders(), 0);
    contact_set_with(robot, inflation, tube, station_z_mm, &multipliers)
}

/// Contact state with explicit inflation-force multipliers.
pub fn contact_set_with(
    robot: &RobotSpec,
    inflation: &InflationState,
    tube: &TubeProfile,
    station_z_mm: f64,
    multipliers: &[f64],
) -> Result<ContactState, DomainError> {
    let tube_d = local_tube_diameter(tube, station_z_mm)?;
    let delta = diameter_ratio(inflation.free_diameter_mm, tube_d)?;
    let arc = bottom_arc(robot);
    let share = gravity_share(robot, &arc, tube.inclination_deg);
    let vertical = tube.is_vertical();

    let sliders = (0..robot.n_sliders())
        .map(|i| {
            let on_arc = arc.contains(&i);
            let mut c = SliderContact {
                slider: i,
                group: robot.group_of_slider[i],
                angle_deg: robot.slider_angles_deg[i],
                in_contact: false,
                inflation_n: 0.0,
                gravity_n: 0.0,
            };
            if delta >= 1.0 {
                let n = inflator_normal_force(robot, inflation.actuation_mm, tube_d)?;
                c.in_contact = true;
                c.inflation_n = n * multipliers.get(i).copied().unwrap_or(1.0);
                if on_arc {
                    c.gravity_n = share;
                }
            } else if !vertical && on_arc {
                c.in_contact = true;
                c.gravity_n = share;
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>, DomainError>>()?;

    Ok(ContactState {
        sliders,
        station_z_mm,
        local_tube_diameter_mm: tube_d,
        free_diameter_mm: inflation.free_diameter_mm,
        inclination_deg: tube.inclination_deg,
    })
}
