use rayon::prelude::*;
use serde::Serialize;

use super::scenarios::Scenario;
use crate::error::ExperimentError;
use crate::model::FrictionParams;
use crate::rng::derive_seed;

/// Allowed departure of the scenario from δ = 1.
const DELTA_ONE_TOL: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadResult {
    pub payload_kg: f64,
    pub mean_eta_percent: f64,
    /// `(seed, η)` per seed.
    pub per_seed: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadComparison {
    pub delta: f64,
    pub cases: Vec<LoadResult>,
}

impl LoadComparison {
    /// η of the heaviest payload minus η of the lightest.
    pub fn gap(&self) -> f64 {
        match (self.cases.first(), self.cases.last()) {
            (Some(a), Some(b)) => b.mean_eta_percent - a.mean_eta_percent,
            _ => 0.0,
        }
    }
}

/// Mean efficiency of `scenario` at each payload, averaged over `seeds`.
pub fn load_comparison(
    scenario: &Scenario,
    friction: &FrictionParams,
    payloads_kg: &[f64],
    seeds: &[u64],
) -> Result<LoadComparison, ExperimentError> {
    let delta = scenario.delta()?;
    if (delta - 1.0).abs() > DELTA_ONE_TOL {
        return Err(ExperimentError::Precondition(format!(
            "load comparison needs delta = 1 within {DELTA_ONE_TOL}, got {delta}"
        )));
    }
    if seeds.is_empty() || payloads_kg.is_empty() {
        return Err(ExperimentError::Precondition("need at least one payload and one seed".into()));
    }
    let cases = payloads_kg
        .iter()
        .map(|&payload| {
            let s = scenario.clone().with_payload(payload);
            let per_seed = seeds
                .par_iter()
                .enumerate()
                .map(|(i, &seed)| {
                    let mut f = friction.clone();
                    f.seed = derive_seed(seed, i as u64);
                    s.measure(&f).map(|m| (seed, m.eta_percent))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mean = per_seed.iter().map(|p| p.1).sum::<f64>() / per_seed.len() as f64;
            Ok(LoadResult {
                payload_kg: payload,
                mean_eta_percent: mean,
                per_seed,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(LoadComparison { delta, cases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SolverSettings;
    use crate::experiments::scenarios::{straight_at_delta, Protocol};
    use crate::model::RobotSpec;

    fn scenario() -> Scenario {
        straight_at_delta(&RobotSpec::default(), 3.0, 1.0)
            .unwrap()
            .with_protocol(Protocol { settle_cycles: 2, cycles: 2 })
            .with_solver(SolverSettings::default().with_substeps(50))
    }

    #[test]
    fn without_resistance_load_is_irrelevant() {
        let mut s = scenario();
        s.load.cart_resistance_coeff = 0.0;
        let c = load_comparison(&s, &FrictionParams::default(), &[0.0, 2.0], &[1]).unwrap();
        assert_eq!(c.cases[0].mean_eta_percent, c.cases[1].mean_eta_percent);
    }

    #[test]
    fn overwhelming_resistance_collapses_transport() {
        let mut s = scenario();
        s.load.cart_resistance_coeff = 0.5;
        let c = load_comparison(&s, &FrictionParams::default(), &[2.0], &[1]).unwrap();
        assert!(c.cases[0].mean_eta_percent < 1.0, "{}", c.cases[0].mean_eta_percent);
    }

    #[test]
    fn requires_unit_delta() {
        let s = straight_at_delta(&RobotSpec::default(), 3.0, 1.2).unwrap();
        assert!(matches!(
            load_comparison(&s, &FrictionParams::default(), &[0.0], &[1]),
            Err(ExperimentError::Precondition(_))
        ));
    }
}
