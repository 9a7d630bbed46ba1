//! One gait cycle phase by phase, with the slip events of each phase.

use ovisim::dynamics::{run_cycle, RunState};
use ovisim::experiments::scenarios::straight_at_delta;
use ovisim::{FrictionParams, RobotSpec};

fn main() {
    let robot = RobotSpec::default();
    let friction = FrictionParams::new(0.5, 0.28697, 0.25321);
    let scenario = straight_at_delta(&robot, 3.0, 1.2).unwrap();
    let setup = scenario.setup(&friction).unwrap();
    let mut state = RunState::new(robot.n_sliders(), scenario.station0_mm);

    for _ in 0..2 {
        let cycle = run_cycle(&mut state, &setup).unwrap();
        println!("cycle {}", cycle.index + 1);
        for p in &cycle.phases {
            println!(
                "  {:<16} tube {:+.4} mm, {} slip events",
                p.label.to_string(),
                p.tube_displacement_mm,
                p.slip_events.len()
            );
        }
        println!(
            "  net {:+.4} mm of {} mm theoretical",
            cycle.net_tube_displacement_mm,
            setup.theoretical_per_cycle_mm()
        );
    }
}
