use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenarios::{Protocol, Scenario, START_STATION_MM};
use super::pearson;
use crate::dynamics::SolverSettings;
use crate::error::ExperimentError;
use crate::inflation::diameter_of;
use crate::model::{FrictionParams, LoadCase, RobotSpec, TubeProfile, TubeShape};
use crate::rng::derive_seed;

/// One (tube, actuation) combination of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub tube: TubeProfile,
    pub actuation_mm: f64,
}

impl GridPoint {
    pub fn describe(&self) -> String {
        let shape = match &self.tube.shape {
            TubeShape::Straight { diameter_mm } => format!("straight {diameter_mm} mm"),
            TubeShape::Conical {
                start_diameter_mm,
                end_diameter_mm,
            } => format!("conical {start_diameter_mm}-{end_diameter_mm} mm"),
            TubeShape::Piecewise { knots } => format!("piecewise {} knots", knots.len()),
        };
        if self.tube.inclination_deg == 0.0 {
            shape
        } else {
            format!("{shape} at {} deg", self.tube.inclination_deg)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: usize,
    pub tube: String,
    pub actuation_mm: f64,
    pub free_diameter_mm: f64,
    pub delta: f64,
    pub seed: u64,
    pub cycles: usize,
    pub net_mm: f64,
    pub theoretical_mm: f64,
    pub eta_percent: f64,
    pub slip_events: usize,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Correlation of (δ, η) over successful rows, or why it is undefined.
    pub pearson_r: Result<f64, String>,
}

impl SweepResult {
    pub fn ok_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.status == RowStatus::Ok)
    }

    pub fn mean_eta(&self) -> Option<f64> {
        let etas: Vec<f64> = self.ok_rows().map(|r| r.eta_percent).collect();
        (!etas.is_empty()).then(|| etas.iter().sum::<f64>() / etas.len() as f64)
    }
}

/// Runs every grid point with every seed, rows ordered by point then seed.
///
/// Each row draws its heterogeneity from `derive_seed(seed, point)`. A row
/// whose run fails is kept with an error status.
pub fn sweep_delta(
    grid: &[GridPoint],
    robot: &RobotSpec,
    friction: &FrictionParams,
    load: &LoadCase,
    protocol: Protocol,
    solver: SolverSettings,
    seeds: &[u64],
) -> Result<SweepResult, ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::Precondition("sweep grid is empty".into()));
    }
    if seeds.is_empty() {
        return Err(ExperimentError::Precondition("no seeds given".into()));
    }
    let jobs: Vec<(usize, &GridPoint, u64)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, p)| seeds.iter().map(move |&s| (i, p, s)))
        .collect();

    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(i, point, seed)| {
            let free = diameter_of(robot, point.actuation_mm).unwrap_or(f64::NAN);
            let station = START_STATION_MM.min(point.tube.length_mm);
            let delta = point
                .tube
                .diameter_at(station)
                .map(|d| free / d)
                .unwrap_or(f64::NAN);
            let mut row = SweepRow {
                point: i,
                tube: point.describe(),
                actuation_mm: point.actuation_mm,
                free_diameter_mm: free,
                delta,
                seed,
                cycles: protocol.cycles,
                net_mm: f64::NAN,
                theoretical_mm: robot.stroke_mm * protocol.cycles as f64,
                eta_percent: f64::NAN,
                slip_events: 0,
                status: RowStatus::Ok,
            };
            let scenario = Scenario {
                name: row.tube.clone(),
                robot: robot.clone(),
                tube: point.tube.clone(),
                actuation_mm: point.actuation_mm,
                load: load.clone(),
                station0_mm: station,
                protocol,
                solver,
            };
            let mut f = friction.clone();
            f.seed = derive_seed(seed, i as u64);
            match scenario.measure(&f) {
                Ok(m) => {
                    row.net_mm = m.net_mm;
                    row.theoretical_mm = m.theoretical_mm;
                    row.eta_percent = m.eta_percent;
                    row.slip_events = m.slip_events;
                }
                Err(e) => row.status = RowStatus::Error(e.to_string()),
            }
            row
        })
        .collect();

    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.status == RowStatus::Ok)
        .map(|r| (r.delta, r.eta_percent))
        .collect();
    let pearson_r = pearson(&samples).map_err(|e| match e {
        ExperimentError::UndefinedCorrelation(reason) => reason.to_string(),
        other => other.to_string(),
    });
    Ok(SweepResult { rows, pearson_r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::efficiency;

    fn ideal() -> FrictionParams {
        FrictionParams::new(0.5, 0.0, 0.3)
    }

    #[test]
    fn single_point_ideal_row() {
        let robot = RobotSpec::default();
        let grid = vec![GridPoint {
            tube: TubeProfile::straight(17.0, 500.0),
            actuation_mm: 2.1,
        }];
        let r = sweep_delta(
            &grid,
            &robot,
            &ideal(),
            &LoadCase::free(),
            Protocol { settle_cycles: 0, cycles: 2 },
            SolverSettings::default().with_substeps(50),
            &[1],
        )
        .unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!((r.rows[0].eta_percent - 100.0).abs() < 1e-6);
        assert_eq!(r.pearson_r, Err("fewer than 2 samples".into()));
    }

    #[test]
    fn rows_are_self_consistent_and_distinct() {
        let robot = RobotSpec::default();
        let grid = vec![
            GridPoint {
                tube: TubeProfile::straight(17.0, 500.0),
                actuation_mm: 2.1,
            },
            GridPoint {
                tube: TubeProfile::straight(17.0, 500.0),
                actuation_mm: 2.1,
            },
        ];
        let r = sweep_delta(
            &grid,
            &robot,
            &FrictionParams::default(),
            &LoadCase::default(),
            Protocol { settle_cycles: 1, cycles: 1 },
            SolverSettings::default().with_substeps(50),
            &[1, 2],
        )
        .unwrap();
        assert_eq!(r.rows.len(), 4);
        for row in &r.rows {
            let eta = efficiency(0.0, row.net_mm, row.theoretical_mm).unwrap();
            assert_eq!(eta, row.eta_percent);
        }
        assert_eq!(r.rows[0].point, 0);
        assert_eq!(r.rows[2].point, 1);
    }

    #[test]
    fn failed_rows_do_not_abort() {
        let robot = RobotSpec::default();
        let grid = vec![
            GridPoint {
                tube: TubeProfile::straight(17.0, 500.0),
                actuation_mm: 2.1,
            },
            GridPoint {
                tube: TubeProfile::straight(17.0, 25.0),
                actuation_mm: 2.1,
            },
        ];
        let r = sweep_delta(
            &grid,
            &robot,
            &ideal(),
            &LoadCase::free(),
            Protocol { settle_cycles: 0, cycles: 3 },
            SolverSettings::default().with_substeps(20),
            &[1],
        )
        .unwrap();
        assert_eq!(r.rows[0].status, RowStatus::Ok);
        assert!(matches!(r.rows[1].status, RowStatus::Error(_)));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let r = sweep_delta(
            &[],
            &RobotSpec::default(),
            &ideal(),
            &LoadCase::free(),
            Protocol::default(),
            SolverSettings::default(),
            &[1],
        );
        assert!(matches!(r, Err(ExperimentError::Precondition(_))));
    }
}
