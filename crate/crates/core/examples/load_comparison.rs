//! Efficiency at diameter ratio 1 with and without a cart payload.

use ovisim::experiments::load_comparison;
use ovisim::experiments::scenarios::load_pair;
use ovisim::{FrictionParams, LoadCase, RobotSpec};

fn main() {
    let robot = RobotSpec::default();
    let friction = FrictionParams::new(0.5, 0.28697, 0.25321);
    let [unloaded, _] = load_pair(&robot, &LoadCase::default()).unwrap();
    let cmp = load_comparison(&unloaded, &friction, &[0.0, 1.0, 2.0, 4.0], &[1, 2, 3]).unwrap();
    for case in &cmp.cases {
        println!("payload {:.1} kg: eta {:.2} %", case.payload_kg, case.mean_eta_percent);
    }
    println!("gap heaviest - lightest: {:.2} points", cmp.gap());
}
