//! Holding capability in a vertical tube with and without wall interference.

use ovisim::experiments::vertical_capability;
use ovisim::inflation::diameter_of;
use ovisim::{FrictionParams, RobotSpec, TubeProfile};

fn main() {
    let robot = RobotSpec::default();
    let friction = FrictionParams::default();
    let free = diameter_of(&robot, 3.0).unwrap();
    for delta in [0.9, 1.0, 1.1, 1.3] {
        let tube = TubeProfile::straight(free / delta, 200.0).with_inclination(90.0);
        let c = vertical_capability(&robot, &tube, 3.0, &friction, robot.mass_kg + 2.0).unwrap();
        println!(
            "delta {delta:.1}: capable {:<5} normal {:7.2} N, capacity {:5.2} kg, margin {:+7.2} N",
            c.capable, c.total_normal_n, c.capacity_kg, c.margin_n
        );
    }
}
