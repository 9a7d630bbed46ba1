//! Ready-made bench scenarios.

use serde::{Deserialize, Serialize};

use super::{efficiency, Measurement};
use crate::dynamics::{run_cycles, run_cycles_observed, RunState, Setup, SolverSettings, TraceRow};
use crate::error::{DomainError, ExperimentError};
use crate::gait::canonical_schedule;
use crate::inflation::diameter_of;
use crate::model::{FrictionParams, LoadCase, RobotSpec, TubeProfile};

/// Default straight tube length (mm).
pub const TUBE_LENGTH_MM: f64 = 500.0;
/// Default starting station of the robot inside the tube (mm).
pub const START_STATION_MM: f64 = 20.0;
/// Starting station in shaped tubes (mm).
pub const CONE_START_MM: f64 = 5.0;
/// Actuation used by the fixed-inflation scenarios (mm).
pub const REFERENCE_ACTUATION_MM: f64 = 3.0;

/// How many cycles to run before and while measuring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Protocol {
    /// Run-in cycles that bring the contacts from relaxed to their periodic state.
    pub settle_cycles: usize,
    pub cycles: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            settle_cycles: 5,
            cycles: 3,
        }
    }
}

/// A robot in a tube under a load, ready to run with any friction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub robot: RobotSpec,
    pub tube: TubeProfile,
    pub actuation_mm: f64,
    pub load: LoadCase,
    pub station0_mm: f64,
    pub protocol: Protocol,
    pub solver: SolverSettings,
}

impl Scenario {
    pub fn setup(&self, friction: &FrictionParams) -> Result<Setup, DomainError> {
        Ok(Setup {
            robot: self.robot.clone(),
            tube: self.tube.clone(),
            actuation_mm: self.actuation_mm,
            friction: friction.clone(),
            load: self.load.clone(),
            schedule: canonical_schedule(self.robot.n_groups, self.robot.stroke_mm)?,
            solver: self.solver,
        })
    }

    /// Diameter ratio at the starting station.
    pub fn delta(&self) -> Result<f64, DomainError> {
        let free = diameter_of(&self.robot, self.actuation_mm)?;
        Ok(free / self.tube.diameter_at(self.station0_mm)?)
    }

    pub fn with_payload(mut self, payload_kg: f64) -> Self {
        self.load.payload_mass_kg = payload_kg;
        self
    }

    pub fn with_protocol(mut self, protocol: Protocol) -> Self {
        self.protocol = protocol;
        self
    }

    pub fn with_solver(mut self, solver: SolverSettings) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Settles, then measures `protocol.cycles` cycles.
    pub fn measure(&self, friction: &FrictionParams) -> Result<Measurement, ExperimentError> {
        self.measure_observed(friction, &mut |_| {})
    }

    /// [`Scenario::measure`], reporting measured substeps to `observer`.
    pub fn measure_observed(
        &self,
        friction: &FrictionParams,
        observer: &mut dyn FnMut(&TraceRow),
    ) -> Result<Measurement, ExperimentError> {
        let setup = self.setup(friction)?;
        let delta = self.delta()?;
        let mut state = RunState::new(self.robot.n_sliders(), self.station0_mm);
        if self.protocol.settle_cycles > 0 {
            run_cycles(self.protocol.settle_cycles, &mut state, &setup)?;
        }
        let cycles = run_cycles_observed(self.protocol.cycles, &mut state, &setup, observer)?;
        let x0 = cycles[0].x_initial_mm;
        let x1 = cycles[cycles.len() - 1].x_final_mm;
        let theoretical = setup.theoretical_per_cycle_mm() * cycles.len() as f64;
        Ok(Measurement {
            net_mm: x1 - x0,
            theoretical_mm: theoretical,
            eta_percent: efficiency(x0, x1, theoretical)?,
            slip_events: cycles.iter().map(|c| c.slip_event_count()).sum(),
            delta,
            cycles,
        })
    }
}

/// Straight horizontal tube sized so the robot at `actuation_mm` sits at ratio `delta`.
pub fn straight_at_delta(robot: &RobotSpec, actuation_mm: f64, delta: f64) -> Result<Scenario, DomainError> {
    let free = diameter_of(robot, actuation_mm)?;
    Ok(Scenario {
        name: format!("straight delta={delta}"),
        robot: robot.clone(),
        tube: TubeProfile::straight(free / delta, TUBE_LENGTH_MM),
        actuation_mm,
        load: LoadCase::default(),
        station0_mm: START_STATION_MM,
        protocol: Protocol::default(),
        solver: SolverSettings::default(),
    })
}

/// Load-comparison pair at δ = 1 on the cart described by `load`:
/// without payload and with a 2 kg payload.
pub fn load_pair(robot: &RobotSpec, load: &LoadCase) -> Result<[Scenario; 2], DomainError> {
    let mut base = straight_at_delta(robot, REFERENCE_ACTUATION_MM, 1.0)?;
    base.load = load.clone().with_payload(0.0);
    Ok([
        base.clone().with_name("delta=1 unloaded"),
        base.with_payload(2.0).with_name("delta=1 loaded 2 kg"),
    ])
}

/// Tube whose diameter falls along the travel direction so that δ rises
/// from `delta_start` at the starting station to `delta_end` at z = `length_mm`.
pub fn conical(
    robot: &RobotSpec,
    actuation_mm: f64,
    delta_start: f64,
    delta_end: f64,
    length_mm: f64,
) -> Result<Scenario, DomainError> {
    let free = diameter_of(robot, actuation_mm)?;
    let (d_start, d_end) = (free / delta_start, free / delta_end);
    // Extend the taper back to z = 0 so the start station has some clearance.
    let slope = (d_end - d_start) / (length_mm - CONE_START_MM);
    Ok(Scenario {
        name: format!("conical delta {delta_start}->{delta_end}"),
        robot: robot.clone(),
        tube: TubeProfile::conical(d_start - slope * CONE_START_MM, d_end, length_mm),
        actuation_mm,
        load: LoadCase::default(),
        station0_mm: CONE_START_MM,
        protocol: Protocol {
            settle_cycles: 5,
            cycles: 5,
        },
        solver: SolverSettings::default(),
    })
}

/// Irregular tube: a gentle constriction followed by relief back to the bore.
pub fn arbitrary_shape(robot: &RobotSpec, actuation_mm: f64) -> Result<Scenario, DomainError> {
    let free = diameter_of(robot, actuation_mm)?;
    let bore = free / 1.1;
    let knots = vec![
        (0.0, bore),
        (60.0, bore),
        (110.0, free / 1.4),
        (150.0, free / 1.4),
        (220.0, free / 1.2),
        (300.0, free / 1.2),
    ];
    Ok(Scenario {
        name: "arbitrary shape".into(),
        robot: robot.clone(),
        tube: TubeProfile::piecewise(knots, 300.0),
        actuation_mm,
        load: LoadCase::default(),
        station0_mm: CONE_START_MM,
        protocol: Protocol {
            settle_cycles: 5,
            cycles: 10,
        },
        solver: SolverSettings::default(),
    })
}

/// Three tube bores × four actuation levels spanning δ ≈ 0.7 to 1.5.
pub fn default_grid(robot: &RobotSpec) -> Result<Vec<super::GridPoint>, DomainError> {
    let mut grid = Vec::new();
    for bore in [15.0, 17.0, 21.0] {
        for actuation in [0.3, 1.2, 2.1, 3.0] {
            let _ = diameter_of(robot, actuation)?;
            grid.push(super::GridPoint {
                tube: TubeProfile::straight(bore, TUBE_LENGTH_MM),
                actuation_mm: actuation,
            });
        }
    }
    Ok(grid)
}
