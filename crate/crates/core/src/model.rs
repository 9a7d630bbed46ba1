//! Domain records shared by every other module, plus their validation.
//!
//! All records are plain values: cheap to clone, `Send + Sync`, and
//! serializable through the config schema. Validation never fails; it
//! returns a [`ValidationReport`] listing each violated invariant with the
//! dotted field path it concerns.

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Gravitational acceleration used throughout (m/s²).
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Measured actuation (mm) to free robot diameter (mm) rows of the prototype.
pub const PROTOTYPE_INFLATION_TABLE: [(f64, f64); 6] = [
    (0.3, 15.0),
    (0.9, 16.7),
    (1.5, 18.7),
    (2.1, 20.5),
    (2.7, 21.4),
    (3.3, 23.1),
];

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Ordered list of violations; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    pub(crate) fn check(&mut self, ok: bool, path: &str, message: &str) {
        if !ok {
            self.push(path, message);
        }
    }

    /// Prefixes every path, used when nesting records.
    pub fn prefixed(mut self, prefix: &str) -> Self {
        for v in &mut self.violations {
            v.path = format!("{prefix}.{}", v.path);
        }
        self
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn contains(&self, message: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(message))
    }

    /// Converts a non-empty report into an error listing every violation.
    pub fn into_result(self) -> Result<(), DomainError> {
        if self.is_ok() {
            Ok(())
        } else {
            let joined = self
                .violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            Err(DomainError::Invalid(joined))
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Anything that can be checked against its invariants.
pub trait Validate {
    fn validate(&self) -> ValidationReport;
}

/// Geometry, gait stroke, mass and inflation characteristics of the robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotSpec {
    pub n_groups: usize,
    pub sliders_per_group: usize,
    /// Slider angles on the circumference, degrees measured from the bottom.
    pub slider_angles_deg: Vec<f64>,
    pub group_of_slider: Vec<usize>,
    /// Axial stroke of one group per phase (mm).
    pub stroke_mm: f64,
    pub mass_kg: f64,
    /// `(actuation_mm, free_diameter_mm)` rows.
    pub inflation_table: Vec<(f64, f64)>,
    /// Normal force gain of one inflator past contact onset (N/mm).
    pub inflator_stiffness_n_per_mm: f64,
    pub n_inflators: usize,
}

impl RobotSpec {
    /// Evenly spaced layout: slider `i` at `i * 360/n` degrees, grouped by `i mod n_groups`.
    pub fn evenly_spaced(n_groups: usize, sliders_per_group: usize) -> Self {
        let n = n_groups * sliders_per_group;
        let pitch = 360.0 / n as f64;
        Self {
            n_groups,
            sliders_per_group,
            slider_angles_deg: (0..n).map(|i| i as f64 * pitch).collect(),
            group_of_slider: (0..n).map(|i| i % n_groups).collect(),
            stroke_mm: 10.0,
            mass_kg: 0.5,
            inflation_table: PROTOTYPE_INFLATION_TABLE.to_vec(),
            inflator_stiffness_n_per_mm: 4.2,
            n_inflators: n,
        }
    }

    pub fn n_sliders(&self) -> usize {
        self.slider_angles_deg.len()
    }

    pub fn weight_n(&self) -> f64 {
        self.mass_kg * STANDARD_GRAVITY
    }

    /// Share of one inflator's force carried by each slider.
    pub fn inflator_share(&self) -> f64 {
        self.n_inflators as f64 / self.n_sliders().max(1) as f64
    }

    /// Rotates every slider angle, wrapping into `[0, 360)` and keeping the list sorted.
    pub fn rotated(&self, degrees: f64) -> Self {
        let mut pairs: Vec<(f64, usize)> = self
            .slider_angles_deg
            .iter()
            .zip(&self.group_of_slider)
            .map(|(a, g)| ((a + degrees).rem_euclid(360.0), *g))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = self.clone();
        out.slider_angles_deg = pairs.iter().map(|p| p.0).collect();
        out.group_of_slider = pairs.iter().map(|p| p.1).collect();
        out
    }
}

impl Default for RobotSpec {
    fn default() -> Self {
        Self::evenly_spaced(3, 3)
    }
}

impl Validate for RobotSpec {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        r.check(self.n_groups >= 2, "n_groups", "n_groups must be >= 2");
        r.check(
            self.sliders_per_group >= 1,
            "sliders_per_group",
            "sliders_per_group must be >= 1",
        );
        let n = self.n_groups * self.sliders_per_group;
        r.check(
            self.slider_angles_deg.len() == n,
            "slider_angles_deg",
            "length must equal n_groups * sliders_per_group",
        );
        r.check(
            self.slider_angles_deg
                .iter()
                .all(|a| a.is_finite() && (0.0..360.0).contains(a)),
            "slider_angles_deg",
            "angles must lie in [0, 360)",
        );
        r.check(
            self.slider_angles_deg.windows(2).all(|w| w[0] < w[1]),
            "slider_angles_deg",
            "angles strictly increasing",
        );
        if self.group_of_slider.len() != self.slider_angles_deg.len() {
            r.push("group_of_slider", "length must equal the slider count");
        } else if self.group_of_slider.iter().any(|&g| g >= self.n_groups) {
            r.push("group_of_slider", "group index out of range");
        } else {
            let mut counts = vec![0usize; self.n_groups];
            for &g in &self.group_of_slider {
                counts[g] += 1;
            }
            r.check(
                counts.iter().all(|&c| c == self.sliders_per_group),
                "group_of_slider",
                "every group has the same slider count",
            );
        }
        r.check(
            self.inflation_table.len() >= 2,
            "inflation_table",
            "at least 2 rows required",
        );
        r.check(
            self.inflation_table
                .iter()
                .all(|(a, d)| a.is_finite() && d.is_finite()),
            "inflation_table",
            "entries must be finite",
        );
        r.check(
            self.inflation_table.windows(2).all(|w| w[0].0 < w[1].0),
            "inflation_table",
            "actuation strictly increasing",
        );
        r.check(
            self.inflation_table.windows(2).all(|w| w[0].1 < w[1].1),
            "inflation_table",
            "diameters strictly increasing",
        );
        r.check(
            self.stroke_mm.is_finite() && self.stroke_mm > 0.0,
            "stroke_mm",
            "stroke_mm must be > 0",
        );
        r.check(
            self.mass_kg.is_finite() && self.mass_kg >= 0.0,
            "mass_kg",
            "mass_kg must be >= 0",
        );
        r.check(
            self.inflator_stiffness_n_per_mm.is_finite() && self.inflator_stiffness_n_per_mm > 0.0,
            "inflator_stiffness_n_per_mm",
            "inflator stiffness must be > 0",
        );
        r.check(self.n_inflators >= 1, "n_inflators", "n_inflators must be >= 1");
        r
    }
}

/// How the tube radius varies along its axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TubeShape {
    Straight {
        diameter_mm: f64,
    },
    /// Linear taper from `start_diameter_mm` at z = 0 to `end_diameter_mm` at z = length.
    Conical {
        start_diameter_mm: f64,
        end_diameter_mm: f64,
    },
    /// `(z_mm, diameter_mm)` knots, linearly interpolated and held constant beyond the ends.
    Piecewise {
        knots: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeProfile {
    pub shape: TubeShape,
    pub length_mm: f64,
    /// 0 = horizontal, 90 = vertical.
    #[serde(default)]
    pub inclination_deg: f64,
}

impl TubeProfile {
    pub fn straight(diameter_mm: f64, length_mm: f64) -> Self {
        Self {
            shape: TubeShape::Straight { diameter_mm },
            length_mm,
            inclination_deg: 0.0,
        }
    }

    pub fn conical(start_diameter_mm: f64, end_diameter_mm: f64, length_mm: f64) -> Self {
        Self {
            shape: TubeShape::Conical {
                start_diameter_mm,
                end_diameter_mm,
            },
            length_mm,
            inclination_deg: 0.0,
        }
    }

    pub fn piecewise(knots: Vec<(f64, f64)>, length_mm: f64) -> Self {
        Self {
            shape: TubeShape::Piecewise { knots },
            length_mm,
            inclination_deg: 0.0,
        }
    }

    pub fn with_inclination(mut self, inclination_deg: f64) -> Self {
        self.inclination_deg = inclination_deg;
        self
    }

    pub fn is_vertical(&self) -> bool {
        self.inclination_deg >= 90.0
    }

    fn diameters(&self) -> Vec<f64> {
        match &self.shape {
            TubeShape::Straight { diameter_mm } => vec![*diameter_mm],
            TubeShape::Conical {
                start_diameter_mm,
                end_diameter_mm,
            } => vec![*start_diameter_mm, *end_diameter_mm],
            TubeShape::Piecewise { knots } => knots.iter().map(|k| k.1).collect(),
        }
    }

    /// Diameter at axial position `z_mm`.
    pub fn diameter_at(&self, z_mm: f64) -> Result<f64, DomainError> {
        if !z_mm.is_finite() {
            return Err(DomainError::NonFinite {
                what: "z_mm",
                value: z_mm,
            });
        }
        // Rounding slack so a station sitting exactly on an end is accepted.
        let slack = 1e-9 * self.length_mm.max(1.0);
        if z_mm < -slack || z_mm > self.length_mm + slack {
            return Err(DomainError::OutsideTube {
                z_mm,
                length_mm: self.length_mm,
            });
        }
        let z = z_mm.clamp(0.0, self.length_mm);
        Ok(match &self.shape {
            TubeShape::Straight { diameter_mm } => *diameter_mm,
            TubeShape::Conical {
                start_diameter_mm,
                end_diameter_mm,
            } => start_diameter_mm + (end_diameter_mm - start_diameter_mm) * z / self.length_mm,
            TubeShape::Piecewise { knots } => interpolate_clamped(knots, z),
        })
    }
}

/// Linear interpolation through sorted knots, constant outside them.
pub(crate) fn interpolate_clamped(knots: &[(f64, f64)], x: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|k| k.0 <= x) - 1;
    let (x0, y0) = knots[i];
    let (x1, y1) = knots[i + 1];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

impl Validate for TubeProfile {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        r.check(
            self.diameters().iter().all(|d| d.is_finite() && *d > 0.0),
            "shape",
            "all diameters must be > 0",
        );
        if let TubeShape::Piecewise { knots } = &self.shape {
            r.check(!knots.is_empty(), "shape.knots", "at least one knot required");
            r.check(
                knots.windows(2).all(|w| w[0].0 < w[1].0),
                "shape.knots",
                "knots strictly increasing in z",
            );
        }
        r.check(
            self.length_mm.is_finite() && self.length_mm > 0.0,
            "length_mm",
            "length_mm must be > 0",
        );
        r.check(
            (0.0..=90.0).contains(&self.inclination_deg),
            "inclination_deg",
            "inclination_deg must lie in [0, 90]",
        );
        r
    }
}

/// How the tangential (bristle) stiffness of a contact is obtained from `k_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StiffnessLaw {
    /// Every contact has stiffness `k_t` (N/mm) regardless of its normal load.
    PerContact,
    /// Stiffness `k_t * N` with `k_t` in N/mm per newton of normal load, so the
    /// presliding (breakaway) deflection `mu_s / k_t` is the same for every contact.
    #[default]
    LoadProportional,
}

/// Coulomb coefficients, bristle stiffness, and normal-force heterogeneity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrictionParams {
    pub mu_s: f64,
    pub mu_k: f64,
    #[serde(alias = "k_t_n_per_mm")]
    pub k_t: f64,
    #[serde(default)]
    pub stiffness_law: StiffnessLaw,
    #[serde(default)]
    pub heterogeneity_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Redraw heterogeneity multipliers every phase instead of once per run.
    #[serde(default)]
    pub per_phase_jitter: bool,
}

impl FrictionParams {
    pub fn new(mu_s: f64, mu_k: f64, k_t: f64) -> Self {
        Self {
            mu_s,
            mu_k,
            k_t,
            ..Self::default()
        }
    }

    pub fn with_law(mut self, law: StiffnessLaw) -> Self {
        self.stiffness_law = law;
        self
    }

    pub fn with_heterogeneity(mut self, sigma: f64, seed: u64) -> Self {
        self.heterogeneity_sigma = sigma;
        self.seed = seed;
        self
    }

    /// Tangential stiffness (N/mm) of a contact carrying `normal_n`.
    pub fn contact_stiffness(&self, normal_n: f64) -> f64 {
        match self.stiffness_law {
            StiffnessLaw::PerContact => self.k_t,
            StiffnessLaw::LoadProportional => self.k_t * normal_n,
        }
    }
}

impl Default for FrictionParams {
    fn default() -> Self {
        Self {
            mu_s: 0.5,
            mu_k: 0.35,
            k_t: 0.3,
            stiffness_law: StiffnessLaw::LoadProportional,
            heterogeneity_sigma: 0.0,
            seed: 0,
            per_phase_jitter: false,
        }
    }
}

impl Validate for FrictionParams {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        r.check(
            self.mu_k.is_finite() && self.mu_k > 0.0,
            "mu_k",
            "mu_k must be > 0",
        );
        r.check(self.mu_s.is_finite(), "mu_s", "mu_s must be finite");
        r.check(self.mu_k <= self.mu_s, "mu_k", "mu_k ≤ mu_s");
        r.check(
            self.k_t.is_finite() && self.k_t > 0.0,
            "k_t",
            "k_t must be > 0",
        );
        r.check(
            self.heterogeneity_sigma.is_finite() && self.heterogeneity_sigma >= 0.0,
            "heterogeneity_sigma",
            "heterogeneity_sigma must be >= 0",
        );
        r
    }
}

/// External loading of the tube/cart in the fixed-robot frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadCase {
    pub cart_mass_kg: f64,
    #[serde(default)]
    pub payload_mass_kg: f64,
    pub cart_resistance_coeff: f64,
    /// Constant axial force on the tube (N); positive opposes transport.
    #[serde(default)]
    pub axial_external_force_n: f64,
}

impl LoadCase {
    pub fn unloaded() -> Self {
        Self::default()
    }

    pub fn with_payload(mut self, payload_mass_kg: f64) -> Self {
        self.payload_mass_kg = payload_mass_kg;
        self
    }

    /// Load without any resistance or drive.
    pub fn free() -> Self {
        Self {
            cart_mass_kg: 0.0,
            payload_mass_kg: 0.0,
            cart_resistance_coeff: 0.0,
            axial_external_force_n: 0.0,
        }
    }

    pub fn total_mass_kg(&self) -> f64 {
        self.cart_mass_kg + self.payload_mass_kg
    }

    /// Magnitude of the Coulomb resistance opposing tube motion (N).
    pub fn resistance_n(&self, inclination_deg: f64) -> f64 {
        self.cart_resistance_coeff
            * self.total_mass_kg()
            * STANDARD_GRAVITY
            * inclination_deg.to_radians().cos().max(0.0)
    }

    /// Constant axial force acting on the tube, positive along +x (against transport).
    pub fn drive_n(&self, inclination_deg: f64) -> f64 {
        self.total_mass_kg() * STANDARD_GRAVITY * inclination_deg.to_radians().sin()
            + self.axial_external_force_n
    }
}

impl Default for LoadCase {
    fn default() -> Self {
        Self {
            cart_mass_kg: 1.0,
            payload_mass_kg: 0.0,
            cart_resistance_coeff: 0.005,
            axial_external_force_n: 0.0,
        }
    }
}

impl Validate for LoadCase {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        r.check(
            self.cart_mass_kg.is_finite() && self.cart_mass_kg >= 0.0,
            "cart_mass_kg",
            "cart_mass_kg must be >= 0",
        );
        r.check(
            self.payload_mass_kg.is_finite() && self.payload_mass_kg >= 0.0,
            "payload_mass_kg",
            "payload_mass_kg must be >= 0",
        );
        r.check(
            self.cart_resistance_coeff.is_finite() && self.cart_resistance_coeff >= 0.0,
            "cart_resistance_coeff",
            "cart_resistance_coeff must be >= 0",
        );
        r.check(
            self.axial_external_force_n.is_finite(),
            "axial_external_force_n",
            "axial_external_force_n must be finite",
        );
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_robot_is_valid() {
        let r = RobotSpec::default().validate();
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn default_layout_interleaves_groups() {
        let robot = RobotSpec::default();
        assert_eq!(robot.n_sliders(), 9);
        assert_eq!(robot.slider_angles_deg[1], 40.0);
        assert_eq!(robot.group_of_slider, vec![0, 1, 2, 0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn decreasing_diameters_are_reported() {
        let robot = RobotSpec {
            inflation_table: vec![(0.3, 15.0), (0.9, 14.0)],
            ..RobotSpec::default()
        };
        let r = robot.validate();
        assert!(r.contains("diameters strictly increasing"), "{r}");
        assert_eq!(r.violations[0].path, "inflation_table");
    }

    #[test]
    fn kinetic_above_static_is_reported() {
        let f = FrictionParams::new(0.4, 0.5, 1.0);
        let r = f.validate();
        assert!(r.contains("mu_k ≤ mu_s"), "{r}");
    }

    #[test]
    fn unequal_groups_are_reported() {
        let mut robot = RobotSpec::default();
        robot.group_of_slider[0] = 1;
        assert!(robot.validate().contains("same slider count"));
    }

    #[test]
    fn tube_validation() {
        assert!(TubeProfile::straight(15.0, 300.0).validate().is_ok());
        let bad = TubeProfile::piecewise(vec![(0.0, 20.0), (0.0, 16.0)], 100.0)
            .with_inclination(95.0);
        let r = bad.validate();
        assert!(r.contains("strictly increasing in z"));
        assert!(r.contains("inclination_deg"));
        assert!(!TubeProfile::straight(-1.0, 10.0).validate().is_ok());
    }

    #[test]
    fn load_validation() {
        assert!(LoadCase::default().validate().is_ok());
        let l = LoadCase::default().with_payload(-2.0);
        assert!(l.validate().contains("payload_mass_kg"));
    }

    #[test]
    fn validation_is_pure() {
        let robot = RobotSpec {
            stroke_mm: 0.0,
            ..RobotSpec::default()
        };
        assert_eq!(robot.validate(), robot.validate());
    }

    #[test]
    fn rotation_by_group_pitch_relabels_groups() {
        let robot = RobotSpec::default();
        let rotated = robot.rotated(40.0);
        assert_eq!(rotated.slider_angles_deg[0], 0.0);
        assert_eq!(rotated.group_of_slider[0], 2);
        assert!(rotated.validate().is_ok());
    }

    #[test]
    fn load_forces_follow_inclination() {
        let l = LoadCase {
            cart_mass_kg: 1.0,
            payload_mass_kg: 1.0,
            cart_resistance_coeff: 0.1,
            axial_external_force_n: 0.5,
        };
        assert!((l.resistance_n(0.0) - 0.1 * 2.0 * 9.81).abs() < 1e-12);
        assert!((l.drive_n(0.0) - 0.5).abs() < 1e-12);
        assert!(l.resistance_n(90.0).abs() < 1e-12);
        assert!((l.drive_n(90.0) - (2.0 * 9.81 + 0.5)).abs() < 1e-9);
    }
}
