//! A narrowing tube against a straight one at the starting diameter ratio.

use ovisim::experiments::scenarios::{conical, straight_at_delta};
use ovisim::{FrictionParams, RobotSpec};

fn main() {
    let robot = RobotSpec::default();
    let friction = FrictionParams::new(0.5, 0.28697, 0.25321);
    let cone = conical(&robot, 3.0, 1.1, 1.46, 100.0).unwrap();
    let m = cone.measure(&friction).unwrap();
    for (i, p) in m.per_cycle_progress_mm().iter().enumerate() {
        println!("cycle {}: {:+.5} mm", i + 1, p);
    }
    let straight = straight_at_delta(&robot, 3.0, 1.1)
        .unwrap()
        .with_protocol(cone.protocol)
        .measure(&friction)
        .unwrap();
    println!("conical eta {:.3} %, straight eta {:.3} %", m.eta_percent, straight.eta_percent);
}
