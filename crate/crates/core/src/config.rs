//! TOML run configuration.
//!
//! ```toml
//! schema_version = 1
//!
//! [robot]                  # every key optional; defaults are the 3×3 prototype
//! mass_kg = 0.5
//! stroke_mm = 10.0
//!
//! [tube]
//! length_mm = 500.0
//! inclination_deg = 0.0
//! shape = { kind = "straight", diameter_mm = 22.25 }
//!
//! [friction]
//! mu_s = 0.5
//! mu_k = 0.287
//! k_t = 0.253
//! stiffness_law = "load_proportional"
//!
//! [load]
//! cart_mass_kg = 1.0
//! payload_mass_kg = 0.0
//! cart_resistance_coeff = 0.005
//!
//! [gait]
//! substeps = 200
//! ramp = "linear"
//!
//! [run]
//! actuation_mm = 3.0
//! station_mm = 20.0
//! settle_cycles = 5
//! cycles = 3
//! ```
//!
//! Tube shapes: `{ kind = "straight", diameter_mm }`,
//! `{ kind = "conical", start_diameter_mm, end_diameter_mm }`,
//! `{ kind = "piecewise", knots = [[z, d], ...] }`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Setup, SolverSettings};
use crate::experiments::{Bounds, GridPoint, Protocol, Scenario};
use crate::gait::{canonical_schedule, validate_schedule, GaitPhase, GaitSchedule, Ramp};
use crate::model::{FrictionParams, LoadCase, RobotSpec, TubeProfile, Validate, ValidationReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("invalid configuration:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaitConfig {
    pub substeps: usize,
    pub ramp: Ramp,
    pub tolerance_n: f64,
    pub max_bisections: usize,
    /// Custom phases; the canonical schedule is used when absent.
    pub phases: Option<Vec<GaitPhase>>,
}

impl Default for GaitConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            substeps: s.substeps,
            ramp: s.ramp,
            tolerance_n: s.tolerance_n,
            max_bisections: s.max_bisections,
            phases: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub actuation_mm: f64,
    pub station_mm: f64,
    pub settle_cycles: usize,
    pub cycles: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = Protocol::default();
        Self {
            actuation_mm: 3.0,
            station_mm: 20.0,
            settle_cycles: p.settle_cycles,
            cycles: p.cycles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub budget: usize,
    pub bounds: Bounds,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            budget: 2000,
            bounds: Bounds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default)]
    pub robot: RobotSpec,
    pub tube: TubeProfile,
    #[serde(default)]
    pub friction: FrictionParams,
    #[serde(default)]
    pub load: LoadCase,
    #[serde(default)]
    pub gait: GaitConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
}

impl Config {
    /// Parses and validates TOML text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(cfg.schema_version));
        }
        let report = cfg.validate();
        if report.is_ok() {
            Ok(cfg)
        } else {
            Err(ConfigError::Invalid(report))
        }
    }

    /// Reads a config file, returning it together with its raw bytes.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), ConfigError> {
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| ConfigError::Parse(format!("{} is not UTF-8", path.display())))?;
        Ok((Self::parse(&text)?, bytes))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn solver(&self) -> SolverSettings {
        SolverSettings {
            substeps: self.gait.substeps,
            tolerance_n: self.gait.tolerance_n,
            max_bisections: self.gait.max_bisections,
            ramp: self.gait.ramp,
        }
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            settle_cycles: self.run.settle_cycles,
            cycles: self.run.cycles,
        }
    }

    pub fn schedule(&self) -> GaitSchedule {
        match &self.gait.phases {
            Some(phases) => GaitSchedule {
                phases: phases.clone(),
                stroke_mm: self.robot.stroke_mm,
            },
            None => canonical_schedule(self.robot.n_groups, self.robot.stroke_mm)
                .expect("validated robot yields a schedule"),
        }
    }

    pub fn setup(&self) -> Setup {
        Setup {
            robot: self.robot.clone(),
            tube: self.tube.clone(),
            actuation_mm: self.run.actuation_mm,
            friction: self.friction.clone(),
            load: self.load.clone(),
            schedule: self.schedule(),
            solver: self.solver(),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            name: "config".into(),
            robot: self.robot.clone(),
            tube: self.tube.clone(),
            actuation_mm: self.run.actuation_mm,
            load: self.load.clone(),
            station0_mm: self.run.station_mm,
            protocol: self.protocol(),
            solver: self.solver(),
        }
    }
}

impl Validate for Config {
    fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        r.merge(self.robot.validate().prefixed("robot"));
        r.merge(self.tube.validate().prefixed("tube"));
        r.merge(self.friction.validate().prefixed("friction"));
        r.merge(self.load.validate().prefixed("load"));
        r.check(self.gait.substeps >= 1, "gait.substeps", "substeps must be >= 1");
        r.check(
            self.gait.tolerance_n > 0.0,
            "gait.tolerance_n",
            "tolerance_n must be > 0",
        );
        if let Some(phases) = &self.gait.phases {
            let s = GaitSchedule {
                phases: phases.clone(),
                stroke_mm: self.robot.stroke_mm,
            };
            r.merge(validate_schedule(&s).prefixed("gait"));
            if s.n_groups() != self.robot.n_groups {
                r.push("gait.phases", "phase width must equal robot.n_groups");
            }
        }
        r.check(
            self.run.actuation_mm.is_finite() && self.run.actuation_mm >= 0.0,
            "run.actuation_mm",
            "actuation_mm must be >= 0",
        );
        r.check(
            (0.0..=self.tube.length_mm).contains(&self.run.station_mm),
            "run.station_mm",
            "station must lie inside the tube",
        );
        r.check(self.run.cycles >= 1, "run.cycles", "cycles must be >= 1");
        r
    }
}

/// Sweep grid file: `[[point]]` tables each holding `actuation_mm` and a `tube`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub point: Vec<GridPoint>,
}

impl GridFile {
    pub fn load(path: &Path) -> Result<Vec<GridPoint>, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let grid: GridFile = toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut r = ValidationReport::default();
        for (i, p) in grid.point.iter().enumerate() {
            r.merge(p.tube.validate().prefixed(&format!("point[{i}].tube")));
            r.check(
                p.actuation_mm.is_finite() && p.actuation_mm >= 0.0,
                &format!("point[{i}].actuation_mm"),
                "actuation_mm must be >= 0",
            );
        }
        if grid.point.is_empty() {
            r.push("point", "grid has no points");
        }
        if r.is_ok() {
            Ok(grid.point)
        } else {
            Err(ConfigError::Invalid(r))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[tube]
length_mm = 500.0
shape = { kind = "straight", diameter_mm = 22.25 }
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = Config::parse(MINIMAL).unwrap();
        assert_eq!(c.robot, RobotSpec::default());
        assert_eq!(c.friction, FrictionParams::default());
        assert_eq!(c.schedule().phases.len(), 4);
    }

    #[test]
    fn round_trips_field_for_field() {
        let c = Config::parse(MINIMAL).unwrap();
        let again = Config::parse(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn violations_carry_field_paths() {
        let text = MINIMAL.to_string() + "[friction]\nmu_s = 0.4\nmu_k = 0.5\n";
        match Config::parse(&text) {
            Err(ConfigError::Invalid(r)) => {
                assert!(r.violations.iter().any(|v| v.path == "friction.mu_k"), "{r}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_versions_are_rejected() {
        assert!(matches!(
            Config::parse(&MINIMAL.replace("schema_version = 1", "schema_version = 2")),
            Err(ConfigError::Schema(2))
        ));
        let text = MINIMAL.to_string() + "[robot]\nmass = 1.0\n";
        match Config::parse(&text) {
            Err(ConfigError::Parse(msg)) => assert!(msg.contains("mass"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn custom_phases_are_validated() {
        let text = MINIMAL.to_string()
            + r#"
[[gait.phases]]
label = { kind = "advance", group = 0 }
deltas_mm = [10.0, 0.0, 0.0]
[[gait.phases]]
label = { kind = "retract_all" }
deltas_mm = [-10.0, -10.0, -10.0]
"#;
        match Config::parse(&text) {
            Err(ConfigError::Invalid(r)) => assert!(r.contains("group sums nonzero"), "{r}"),
            other => panic!("{other:?}"),
        }
    }
}
