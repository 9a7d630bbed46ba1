//! Fits kinetic friction and bristle stiffness to the bench efficiencies.

use std::time::Instant;

use ovisim::experiments::{calibrate, CalibrationTarget};
use ovisim::{FrictionParams, LoadCase, RobotSpec};

fn main() {
    let target = CalibrationTarget::bench(&RobotSpec::default(), &LoadCase::default()).unwrap();
    let start = Instant::now();
    let fit = calibrate(&target, &FrictionParams::default(), 2000).unwrap();
    let f = &fit.friction;
    println!(
        "mu_s {:.4}  mu_k {:.5}  k_t {:.5}  ({} evaluations, {:.1} s)",
        f.mu_s,
        f.mu_k,
        f.k_t,
        fit.evaluations,
        start.elapsed().as_secs_f64()
    );
    for r in &fit.residuals {
        println!("  {}: {:.4} % (target {} %)", r.name, r.achieved_percent, r.target_percent);
    }
}
