//! Travel through an irregular bore: constriction then relief.

use ovisim::experiments::scenarios::arbitrary_shape;
use ovisim::{FrictionParams, RobotSpec};

fn main() {
    let robot = RobotSpec::default();
    let friction = FrictionParams::new(0.5, 0.28697, 0.25321);
    let s = arbitrary_shape(&robot, 3.0).unwrap();
    let m = s.measure(&friction).unwrap();
    for c in &m.cycles {
        let station = s.station0_mm - c.x_final_mm;
        let d = s.tube.diameter_at(station).unwrap();
        println!(
            "cycle {:2}: {:+.4} mm, station {station:6.2} mm, bore {d:.3} mm",
            c.index + 1,
            c.net_tube_displacement_mm
        );
    }
    println!("eta {:.2} %", m.eta_percent);
}
