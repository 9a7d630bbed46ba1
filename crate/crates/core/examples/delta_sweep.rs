//! Efficiency against diameter ratio over the default 12-point grid.

use ovisim::dynamics::SolverSettings;
use ovisim::experiments::scenarios::{default_grid, Protocol};
use ovisim::experiments::sweep_delta;
use ovisim::{FrictionParams, LoadCase, RobotSpec};

fn main() {
    let robot = RobotSpec::default();
    let friction = FrictionParams::new(0.5, 0.28697, 0.25321);
    let grid = default_grid(&robot).unwrap();
    let result = sweep_delta(
        &grid,
        &robot,
        &friction,
        &LoadCase::default(),
        Protocol::default(),
        SolverSettings::default(),
        &[1, 2, 3],
    )
    .unwrap();
    println!("delta,eta_percent,seed");
    for row in result.ok_rows() {
        println!("{:.3},{:.3},{}", row.delta, row.eta_percent, row.seed);
    }
    println!("pearson r = {:?}", result.pearson_r);
    println!("mean eta = {:.2} %", result.mean_eta().unwrap_or(f64::NAN));
}
