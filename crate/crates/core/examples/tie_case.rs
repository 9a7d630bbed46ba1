//! Two movers against two equally loaded holders, then with uneven contacts.

use ovisim::dynamics::{run_cycles, RunState};
use ovisim::experiments::scenarios::straight_at_delta;
use ovisim::gait::PhaseLabel;
use ovisim::{FrictionParams, LoadCase, RobotSpec};

fn holder_slips(friction: &FrictionParams) -> usize {
    let mut robot = RobotSpec::evenly_spaced(2, 2);
    robot.mass_kg = 0.0;
    let scenario = straight_at_delta(&robot, 3.0, 1.2).unwrap();
    let mut setup = scenario.setup(friction).unwrap();
    setup.load = LoadCase::free();
    let mut state = RunState::new(robot.n_sliders(), scenario.station0_mm);
    run_cycles(4, &mut state, &setup)
        .unwrap()
        .iter()
        .flat_map(|c| &c.phases)
        .map(|p| match p.label {
            PhaseLabel::Advance(g) => p.holder_breakaways(&[g]),
            PhaseLabel::RetractAll => 0,
        })
        .sum()
}

fn main() {
    let base = FrictionParams::new(0.5, 0.28697, 0.25321);
    println!("equal contacts: {} holder slips", holder_slips(&base));
    for seed in 1..=5 {
        let f = base.clone().with_heterogeneity(0.3, seed);
        println!("sigma 0.3 seed {seed}: {} holder slips", holder_slips(&f));
    }
}
