//! Rate-independent quasi-static stick-slip integrator.
//!
//! The robot is held fixed and the tube (on its cart) is the free body, as on
//! the test bench. Each contacting slider is an elasto-plastic bristle: it
//! deflects elastically with the slider–tube relative motion until the
//! tangential force reaches `mu_s·N`, then slides at `mu_k·N` until the
//! relative motion reverses.
//!
//! Per substep the prescribed group increments are applied and the tube
//! increment `dx` solves the axial balance
//!
//! ```text
//! R(dx) = Σ Fᵢ(dx) + D − C·sign(dx) = 0
//! ```
//!
//! with `D` the constant axial drive on the tube and `C` the Coulomb cart
//! resistance. Every `Fᵢ` is non-increasing in `dx`, so `R` is too and the
//! root closest to zero is found by bisection. A slider whose trial force
//! exceeds the static limit breaks away to the kinetic level; the balance is
//! then re-solved with zero prescribed motion until no further slider breaks.

use serde::Serialize;

use crate::contact::{contact_set_with, heterogeneity_multipliers, ContactState};
use crate::error::{DomainError, DynamicsError};
use crate::gait::{GaitPhase, GaitSchedule, PhaseLabel, Ramp};
use crate::inflation::InflationState;
use crate::model::{FrictionParams, LoadCase, RobotSpec, TubeProfile};

/// Slack on the friction cone and on force ties (N).
pub const FORCE_TOL_N: f64 = 1e-9;

const MAX_BRACKET_DOUBLINGS: usize = 80;

/// Numerical settings of the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub substeps: usize,
    pub tolerance_n: f64,
    pub max_bisections: usize,
    pub ramp: Ramp,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            substeps: 200,
            tolerance_n: FORCE_TOL_N,
            max_bisections: 200,
            ramp: Ramp::Linear,
        }
    }
}

impl SolverSettings {
    pub fn with_substeps(mut self, substeps: usize) -> Self {
        self.substeps = substeps;
        self
    }

    pub fn with_ramp(mut self, ramp: Ramp) -> Self {
        self.ramp = ramp;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    fn of(v: f64) -> Self {
        if v >= 0.0 {
            Self::Positive
        } else {
            Self::Negative
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }
}

/// Tangential state of one slider contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bristle {
    /// Elastic deflection along the tube axis (mm); the tangential force on
    /// the tube is `stiffness · deflection_mm`.
    pub deflection_mm: f64,
    /// Sliding direction of the slider relative to the tube, if sliding.
    pub sliding: Option<Direction>,
}

impl Bristle {
    pub const RELAXED: Self = Self {
        deflection_mm: 0.0,
        sliding: None,
    };
}

/// One bristle per robot slider (non-contacting sliders stay relaxed).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BristleState {
    pub bristles: Vec<Bristle>,
}

impl BristleState {
    pub fn relaxed(n_sliders: usize) -> Self {
        Self {
            bristles: vec![Bristle::RELAXED; n_sliders],
        }
    }

    /// Adapts the state to new normal forces: lost contacts relax, the rest
    /// are projected back into their friction cone.
    pub fn conform(&mut self, contacts: &ContactState, friction: &FrictionParams) {
        for (b, c) in self.bristles.iter_mut().zip(&contacts.sliders) {
            let n = c.normal_force_n();
            if !c.in_contact || n <= 0.0 {
                *b = Bristle::RELAXED;
                continue;
            }
            let k = friction.contact_stiffness(n);
            match b.sliding {
                Some(d) => b.deflection_mm = d.sign() * friction.mu_k * n / k,
                None => {
                    let limit = friction.mu_s * n / k;
                    b.deflection_mm = b.deflection_mm.clamp(-limit, limit);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    StickToSlip,
    SlipToStick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlipEvent {
    pub slider: usize,
    pub group: usize,
    pub tau: f64,
    pub transition: Transition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseResult {
    pub label: PhaseLabel,
    /// Signed tube displacement (mm); transport is negative.
    pub tube_displacement_mm: f64,
    pub slip_events: Vec<SlipEvent>,
    pub bristles: BristleState,
}

impl PhaseResult {
    /// Breakaways of sliders whose group does not move in this phase.
    pub fn holder_breakaways(&self, moving_groups: &[usize]) -> usize {
        self.slip_events
            .iter()
            .filter(|e| e.transition == Transition::StickToSlip && !moving_groups.contains(&e.group))
            .count()
    }
}

/// Snapshot after one substep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub cycle: usize,
    pub phase: usize,
    pub label: PhaseLabel,
    pub tau: f64,
    pub tube_x_mm: f64,
    /// Tangential force of every slider on the tube (N).
    pub forces_n: Vec<f64>,
    /// Static limit `mu_s·N` of every slider (N).
    pub limits_n: Vec<f64>,
}

/// Where a phase sits inside a run, used to label errors and trace rows.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseContext {
    pub cycle: usize,
    pub phase: usize,
    pub origin_mm: f64,
}

#[derive(Debug, Clone, Copy)]
struct Active {
    slider: usize,
    group: usize,
    k: f64,
    static_n: f64,
    kinetic_n: f64,
}

impl Active {
    fn force(&self, b: &Bristle, u: f64) -> f64 {
        if let Some(d) = b.sliding {
            if u * d.sign() >= 0.0 {
                return d.sign() * self.kinetic_n;
            }
        }
        (self.k * (b.deflection_mm + u)).clamp(-self.static_n, self.static_n)
    }

    fn current_force(&self, b: &Bristle) -> f64 {
        match b.sliding {
            Some(d) => d.sign() * self.kinetic_n,
            None => self.k * b.deflection_mm,
        }
    }
}

struct Balance<'a> {
    active: &'a [Active],
    drive_n: f64,
    resistance_n: f64,
    settings: &'a SolverSettings,
    phase: usize,
}

impl Balance<'_> {
    fn slider_sum(&self, bristles: &[Bristle], increments: &[f64], dx: f64) -> f64 {
        self.active
            .iter()
            .map(|a| a.force(&bristles[a.slider], increments[a.group] - dx))
            .sum::<f64>()
            + self.drive_n
    }

    /// Tube increment for prescribed group increments.
    fn solve(&self, bristles: &[Bristle], increments: &[f64]) -> Result<f64, DynamicsError> {
        let tol = self.settings.tolerance_n;
        let f0 = self.slider_sum(bristles, increments, 0.0);
        if f0.abs() <= self.resistance_n + tol {
            return Ok(0.0);
        }
        let s = f0.signum();
        let residual = |t: f64| self.slider_sum(bristles, increments, s * t) - s * self.resistance_n;

        let mut hi = increments
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1e-6);
        let mut doublings = 0;
        while s * residual(hi) > tol {
            hi *= 2.0;
            doublings += 1;
            if doublings > MAX_BRACKET_DOUBLINGS {
                return Err(DynamicsError::Unheld {
                    phase: self.phase,
                    net_load_n: self.drive_n,
                });
            }
        }
        // Converge on the boundary of the set {s·R ≤ tol} nearest zero: with
        // clamped forces R can be flat at zero, and the nearest root is the
        // one where no further slider is pushed past its limit.
        let mut lo = 0.0;
        for _ in 0..self.settings.max_bisections {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
            if s * residual(mid) > 1e-3 * tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = residual(hi);
        if r.abs() <= tol {
            Ok(s * hi)
        } else {
            Err(DynamicsError::NonConvergence {
                phase: self.phase,
                residual_n: r.abs(),
            })
        }
    }

    /// Commits the motion; returns whether any slider broke away.
    fn commit(
        &self,
        bristles: &mut [Bristle],
        increments: &[f64],
        dx: f64,
        tau: f64,
        events: &mut Vec<SlipEvent>,
    ) -> bool {
        let mut broke = false;
        for a in self.active {
            let b = &mut bristles[a.slider];
            let u = increments[a.group] - dx;
            let event = |transition| SlipEvent {
                slider: a.slider,
                group: a.group,
                tau,
                transition,
            };
            if let Some(d) = b.sliding {
                if u * d.sign() >= 0.0 {
                    continue;
                }
                b.sliding = None;
                events.push(event(Transition::SlipToStick));
            }
            let trial = b.deflection_mm + u;
            if (a.k * trial).abs() > a.static_n + self.settings.tolerance_n {
                let d = Direction::of(trial);
                b.sliding = Some(d);
                b.deflection_mm = d.sign() * a.kinetic_n / a.k;
                events.push(event(Transition::StickToSlip));
                broke = true;
            } else {
                b.deflection_mm = trial;
            }
        }
        broke
    }
}

fn active_set(contacts: &ContactState, friction: &FrictionParams) -> Vec<Active> {
    contacts
        .sliders
        .iter()
        .filter(|c| c.in_contact && c.normal_force_n() > 0.0)
        .map(|c| {
            let n = c.normal_force_n();
            Active {
                slider: c.slider,
                group: c.group,
                k: friction.contact_stiffness(n),
                static_n: friction.mu_s * n,
                kinetic_n: friction.mu_k * n,
            }
        })
        .collect()
}

/// Runs one gait phase from `bristles` against fixed contacts.
pub fn run_phase(
    bristles: &BristleState,
    contacts: &ContactState,
    phase: &GaitPhase,
    friction: &FrictionParams,
    load: &LoadCase,
    settings: &SolverSettings,
) -> Result<PhaseResult, DynamicsError> {
    run_phase_observed(
        bristles,
        contacts,
        phase,
        friction,
        load,
        settings,
        PhaseContext::default(),
        &mut |_| {},
    )
}

/// [`run_phase`] reporting every substep to `observer`.
#[allow(clippy::too_many_arguments)]
pub fn run_phase_observed(
    bristles: &BristleState,
    contacts: &ContactState,
    phase: &GaitPhase,
    friction: &FrictionParams,
    load: &LoadCase,
    settings: &SolverSettings,
    ctx: PhaseContext,
    observer: &mut dyn FnMut(&TraceRow),
) -> Result<PhaseResult, DynamicsError> {
    if bristles.bristles.len() != contacts.sliders.len() {
        return Err(DynamicsError::Mismatch {
            contacts: contacts.sliders.len(),
            bristles: bristles.bristles.len(),
        });
    }
    if settings.substeps == 0 {
        return Err(DomainError::Invalid("substeps must be >= 1".into()).into());
    }
    if let Some(c) = contacts.sliders.iter().find(|c| c.group >= phase.deltas_mm.len()) {
        return Err(DomainError::Gait(format!(
            "slider {} belongs to group {} but the phase has {} groups",
            c.slider,
            c.group,
            phase.deltas_mm.len()
        ))
        .into());
    }

    let active = active_set(contacts, friction);
    let balance = Balance {
        active: &active,
        drive_n: load.drive_n(contacts.inclination_deg),
        resistance_n: load.resistance_n(contacts.inclination_deg),
        settings,
        phase: ctx.phase,
    };
    let mut state = bristles.clone();
    let mut events = Vec::new();
    let mut total = 0.0;
    let n_groups = phase.deltas_mm.len();
    let zeros = vec![0.0; n_groups];
    let mut increments = vec![0.0; n_groups];
    let max_snaps = 4 * active.len() + 16;
    let limits: Vec<f64> = contacts
        .sliders
        .iter()
        .map(|c| if c.in_contact { friction.mu_s * c.normal_force_n() } else { 0.0 })
        .collect();

    let mut prev = settings.ramp.at(0.0);
    for j in 1..=settings.substeps {
        let tau = j as f64 / settings.substeps as f64;
        let now = settings.ramp.at(tau);
        for (inc, d) in increments.iter_mut().zip(&phase.deltas_mm) {
            *inc = d * (now - prev);
        }
        prev = now;

        let dx = balance.solve(&state.bristles, &increments)?;
        let mut broke = balance.commit(&mut state.bristles, &increments, dx, tau, &mut events);
        total += dx;
        let mut snaps = 0;
        while broke {
            snaps += 1;
            if snaps > max_snaps {
                return Err(DynamicsError::NonConvergence {
                    phase: ctx.phase,
                    residual_n: f64::NAN,
                });
            }
            let dx = balance.solve(&state.bristles, &zeros)?;
            broke = balance.commit(&mut state.bristles, &zeros, dx, tau, &mut events);
            total += dx;
        }

        let mut forces = vec![0.0; contacts.sliders.len()];
        for a in &active {
            forces[a.slider] = a.current_force(&state.bristles[a.slider]);
        }
        observer(&TraceRow {
            cycle: ctx.cycle,
            phase: ctx.phase,
            label: phase.label,
            tau,
            tube_x_mm: ctx.origin_mm + total,
            forces_n: forces,
            limits_n: limits.clone(),
        });
    }

    Ok(PhaseResult {
        label: phase.label,
        tube_displacement_mm: total,
        slip_events: events,
        bristles: state,
    })
}

/// Everything a run needs besides its mutable state.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub robot: RobotSpec,
    pub tube: TubeProfile,
    pub actuation_mm: f64,
    pub friction: FrictionParams,
    pub load: LoadCase,
    pub schedule: GaitSchedule,
    pub solver: SolverSettings,
}

impl Setup {
    pub fn theoretical_per_cycle_mm(&self) -> f64 {
        self.schedule.stroke_mm
    }
}

/// Mutable state carried from cycle to cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunState {
    pub bristles: BristleState,
    /// Cart (tube) position; transport is negative.
    pub tube_x_mm: f64,
    /// Robot station in tube coordinates when `tube_x_mm` is zero.
    pub station0_mm: f64,
    pub cycles_done: usize,
    pub phases_done: usize,
}

impl RunState {
    pub fn new(n_sliders: usize, station0_mm: f64) -> Self {
        Self {
            bristles: BristleState::relaxed(n_sliders),
            tube_x_mm: 0.0,
            station0_mm,
            cycles_done: 0,
            phases_done: 0,
        }
    }

    /// Robot station in tube coordinates.
    pub fn station_mm(&self) -> f64 {
        self.station0_mm - self.tube_x_mm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleResult {
    pub index: usize,
    pub phases: Vec<PhaseResult>,
    pub x_initial_mm: f64,
    pub x_final_mm: f64,
    pub net_tube_displacement_mm: f64,
}

impl CycleResult {
    pub fn slip_event_count(&self) -> usize {
        self.phases.iter().map(|p| p.slip_events.len()).sum()
    }
}

/// Contact state at the current station.
pub fn contacts_at(setup: &Setup, state: &RunState, label: PhaseLabel) -> Result<ContactState, DynamicsError> {
    let inflation = InflationState::new(&setup.robot, setup.actuation_mm)?;
    let multipliers =
        heterogeneity_multipliers(&setup.friction, setup.robot.n_sliders(), state.phases_done as u64);
    let station = state.station_mm();
    contact_set_with(&setup.robot, &inflation, &setup.tube, station, &multipliers).map_err(|e| match e {
        DomainError::OutsideTube { length_mm, .. } => DynamicsError::StationOutside {
            phase: state.phases_done,
            label: label.to_string(),
            station_mm: station,
            length_mm,
        },
        other => other.into(),
    })
}

/// Runs one full gait cycle, re-evaluating contacts at the start of each phase.
pub fn run_cycle(state: &mut RunState, setup: &Setup) -> Result<CycleResult, DynamicsError> {
    run_cycle_observed(state, setup, &mut |_| {})
}

/// [`run_cycle`] reporting every substep to `observer`.
pub fn run_cycle_observed(
    state: &mut RunState,
    setup: &Setup,
    observer: &mut dyn FnMut(&TraceRow),
) -> Result<CycleResult, DynamicsError> {
    let x_initial = state.tube_x_mm;
    let mut phases = Vec::with_capacity(setup.schedule.phases.len());
    for phase in &setup.schedule.phases {
        let contacts = contacts_at(setup, state, phase.label)?;
        state.bristles.conform(&contacts, &setup.friction);
        let ctx = PhaseContext {
            cycle: state.cycles_done,
            phase: state.phases_done,
            origin_mm: state.tube_x_mm,
        };
        let result = run_phase_observed(
            &state.bristles,
            &contacts,
            phase,
            &setup.friction,
            &setup.load,
            &setup.solver,
            ctx,
            observer,
        )?;
        state.bristles = result.bristles.clone();
        state.tube_x_mm += result.tube_displacement_mm;
        let station = state.station_mm();
        let length = setup.tube.length_mm;
        if station < 0.0 || station > length {
            return Err(DynamicsError::StationOutside {
                phase: state.phases_done,
                label: phase.label.to_string(),
                station_mm: station,
                length_mm: length,
            });
        }
        state.phases_done += 1;
        phases.push(result);
    }
    let index = state.cycles_done;
    state.cycles_done += 1;
    Ok(CycleResult {
        index,
        phases,
        x_initial_mm: x_initial,
        x_final_mm: state.tube_x_mm,
        net_tube_displacement_mm: state.tube_x_mm - x_initial,
    })
}

/// Runs `n` consecutive cycles carrying bristle and cart state.
pub fn run_cycles(n: usize, state: &mut RunState, setup: &Setup) -> Result<Vec<CycleResult>, DynamicsError> {
    run_cycles_observed(n, state, setup, &mut |_| {})
}

pub fn run_cycles_observed(
    n: usize,
    state: &mut RunState,
    setup: &Setup,
    observer: &mut dyn FnMut(&TraceRow),
) -> Result<Vec<CycleResult>, DynamicsError> {
    if n == 0 {
        return Err(DomainError::Invalid("cycle count must be >= 1".into()).into());
    }
    (0..n).map(|_| run_cycle_observed(state, setup, observer)).collect()
}
