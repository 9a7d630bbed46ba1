//! Free diameter, per-slider holding force and vertical payload across actuation.

use ovisim::inflation::{diameter_of, inflator_normal_force, payload_capacity};
use ovisim::{RobotSpec, TubeProfile};

fn main() {
    let robot = RobotSpec::default();
    let bore = diameter_of(&robot, 0.0).unwrap();
    let tube = TubeProfile::straight(bore, 200.0);
    println!("tube bore {bore:.2} mm (contact onset at zero actuation)");
    println!("actuation_mm,free_diameter_mm,force_per_slider_n,payload_kg");
    for i in 0..=8 {
        let a = 0.5 * i as f64;
        println!(
            "{a:.1},{:.3},{:.2},{:.2}",
            diameter_of(&robot, a).unwrap(),
            inflator_normal_force(&robot, a, bore).unwrap(),
            payload_capacity(&robot, a, &tube, 100.0, 0.5).unwrap()
        );
    }
}
