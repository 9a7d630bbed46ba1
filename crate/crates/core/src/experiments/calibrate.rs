//! Fits friction parameters to measured efficiencies.
//!
//! The free parameters are mapped to the unit box and searched with a
//! bounded Nelder–Mead simplex, restarted around the incumbent, and finished
//! by a shrinking coordinate search. Every candidate is clamped to its
//! bounds and `mu_k` is capped at `mu_s`, so each evaluated point is
//! admissible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenarios::{load_pair, Scenario};
use crate::error::{DomainError, ExperimentError};
use crate::model::{FrictionParams, LoadCase, RobotSpec};

const PENALTY: f64 = 1e9;
const F_TOL: f64 = 1e-8;
const X_TOL: f64 = 1e-6;
const RESTARTS: usize = 3;

/// Closed intervals for each calibrated parameter; `lo == hi` pins it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub mu_s: (f64, f64),
    pub mu_k: (f64, f64),
    pub k_t: (f64, f64),
    pub heterogeneity_sigma: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            mu_s: (0.5, 0.5),
            mu_k: (0.02, 0.5),
            k_t: (0.05, 5.0),
            heterogeneity_sigma: (0.0, 0.0),
        }
    }
}

impl Bounds {
    fn as_array(&self) -> [(f64, f64); 4] {
        [self.mu_s, self.mu_k, self.k_t, self.heterogeneity_sigma]
    }

    fn check(&self) -> Result<(), ExperimentError> {
        let names = ["mu_s", "mu_k", "k_t", "heterogeneity_sigma"];
        for (name, (lo, hi)) in names.iter().zip(self.as_array()) {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < 0.0 {
                return Err(ExperimentError::Precondition(format!(
                    "bounds for {name} must satisfy 0 <= lo <= hi, got ({lo}, {hi})"
                )));
            }
        }
        if self.k_t.0 <= 0.0 {
            return Err(ExperimentError::Precondition("k_t lower bound must be > 0".into()));
        }
        if self.mu_s.1 <= 0.0 {
            return Err(ExperimentError::Precondition("mu_s upper bound must be > 0".into()));
        }
        if self.mu_k.0 > self.mu_s.1 {
            return Err(ExperimentError::Precondition(format!(
                "no feasible point: mu_k lower bound {} exceeds mu_s upper bound {}",
                self.mu_k.0, self.mu_s.1
            )));
        }
        Ok(())
    }
}

/// One efficiency to match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub scenario: Scenario,
    pub eta_percent: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub targets: Vec<Target>,
    pub bounds: Bounds,
}

impl CalibrationTarget {
    /// 65 % unloaded and 63 % with a 2 kg payload, both at δ = 1 in a horizontal tube.
    pub fn bench(robot: &RobotSpec, load: &LoadCase) -> Result<Self, DomainError> {
        let [unloaded, loaded] = load_pair(robot, load)?;
        Ok(Self {
            targets: vec![
                Target {
                    scenario: unloaded,
                    eta_percent: 65.0,
                    weight: 1.0,
                },
                Target {
                    scenario: loaded,
                    eta_percent: 63.0,
                    weight: 1.0,
                },
            ],
            bounds: Bounds::default(),
        })
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if self.targets.is_empty() {
            return Err(ExperimentError::Precondition("no calibration targets".into()));
        }
        if let Some(t) = self.targets.iter().find(|t| !(t.weight > 0.0)) {
            return Err(ExperimentError::Precondition(format!(
                "target '{}' has non-positive weight {}",
                t.scenario.name, t.weight
            )));
        }
        self.bounds.check()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub target_percent: f64,
    pub achieved_percent: f64,
    pub weight: f64,
}

impl Residual {
    pub fn residual(&self) -> f64 {
        self.achieved_percent - self.target_percent
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub friction: FrictionParams,
    pub residuals: Vec<Residual>,
    pub objective: f64,
    pub evaluations: usize,
    /// False when the evaluation budget ran out before the search settled.
    pub converged: bool,
}

struct Space {
    base: FrictionParams,
    bounds: [(f64, f64); 4],
    free: Vec<usize>,
}

impl Space {
    fn decode(&self, x: &[f64]) -> FrictionParams {
        let mut v: [f64; 4] = std::array::from_fn(|i| self.bounds[i].0);
        for (&dim, &xi) in self.free.iter().zip(x) {
            let (lo, hi) = self.bounds[dim];
            v[dim] = lo + (hi - lo) * xi.clamp(0.0, 1.0);
        }
        let mut f = self.base.clone();
        f.mu_s = v[0];
        f.mu_k = v[1].min(v[0]);
        f.k_t = v[2];
        f.heterogeneity_sigma = v[3];
        f
    }

    fn encode(&self, f: &FrictionParams) -> Vec<f64> {
        let v = [f.mu_s, f.mu_k, f.k_t, f.heterogeneity_sigma];
        self.free
            .iter()
            .map(|&dim| {
                let (lo, hi) = self.bounds[dim];
                ((v[dim] - lo) / (hi - lo)).clamp(0.0, 1.0)
            })
            .collect()
    }
}

struct Search<'a> {
    objective: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    budget: usize,
    evaluations: usize,
    best: (Vec<f64>, f64),
}

/// Signals that the budget is spent.
struct Exhausted;

impl Search<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<f64, Exhausted> {
        if self.evaluations >= self.budget {
            return Err(Exhausted);
        }
        self.evaluations += 1;
        let x: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let f = (self.objective)(&x);
        if f < self.best.1 {
            self.best = (x, f);
        }
        Ok(f)
    }

    fn nelder_mead(&mut self, start: &[f64], step: f64) -> Result<(), Exhausted> {
        let n = start.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let f0 = self.eval(start)?;
        simplex.push((start.to_vec(), f0));
        for i in 0..n {
            let mut x = start.to_vec();
            x[i] = if x[i] + step <= 1.0 { x[i] + step } else { x[i] - step };
            let f = self.eval(&x)?;
            simplex.push((x, f));
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
                })
                .fold(0.0_f64, f64::max);
            if spread <= F_TOL || size <= X_TOL {
                return Ok(());
            }
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|p| p.0[j]).sum::<f64>() / n as f64)
                .collect();
            let toward = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| (c + t * (w - c)).clamp(0.0, 1.0))
                    .collect()
            };
            let xr = toward(-1.0);
            let fr = self.eval(&xr)?;
            if fr < simplex[0].1 {
                let xe = toward(-2.0);
                let fe = self.eval(&xe)?;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = toward(-0.5);
                    let fc = self.eval(&xc)?;
                    (xc, fc)
                } else {
                    let xc = toward(0.5);
                    let fc = self.eval(&xc)?;
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for p in simplex.iter_mut().skip(1) {
                        let x: Vec<f64> = p.0.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                        let f = self.eval(&x)?;
                        *p = (x, f);
                    }
                }
            }
        }
    }

    fn coordinate_refine(&mut self) -> Result<(), Exhausted> {
        let mut step = 0.05;
        while step > X_TOL {
            let mut improved = false;
            for i in 0..self.best.0.len() {
                for dir in [1.0, -1.0] {
                    let mut x = self.best.0.clone();
                    x[i] = (x[i] + dir * step).clamp(0.0, 1.0);
                    let before = self.best.1;
                    self.eval(&x)?;
                    if self.best.1 < before - F_TOL {
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok(())
    }

    fn run(&mut self, start: &[f64]) -> Result<(), Exhausted> {
        self.nelder_mead(start, 0.25)?;
        let mut step = 0.1;
        for _ in 0..RESTARTS {
            let before = self.best.1;
            let x = self.best.0.clone();
            self.nelder_mead(&x, step)?;
            if before - self.best.1 <= F_TOL {
                break;
            }
            step *= 0.5;
        }
        self.coordinate_refine()
    }
}

fn achieved(targets: &[Target], friction: &FrictionParams) -> Vec<Option<f64>> {
    targets
        .par_iter()
        .map(|t| t.scenario.measure(friction).ok().map(|m| m.eta_percent))
        .collect()
}

fn weighted_error(targets: &[Target], etas: &[Option<f64>]) -> f64 {
    targets
        .iter()
        .zip(etas)
        .map(|(t, eta)| match eta {
            Some(e) => t.weight * (e - t.eta_percent).powi(2),
            None => PENALTY,
        })
        .sum()
}

/// Minimises the weighted squared efficiency error within `budget` evaluations.
///
/// `base` supplies everything that is not calibrated (stiffness law, seed,
/// jitter); its calibrated fields seed the search after clamping to bounds.
pub fn calibrate(
    target: &CalibrationTarget,
    base: &FrictionParams,
    budget: usize,
) -> Result<CalibrationResult, ExperimentError> {
    target.check()?;
    if budget == 0 {
        return Err(ExperimentError::Precondition("evaluation budget must be >= 1".into()));
    }
    let bounds = target.bounds.as_array();
    let space = Space {
        base: base.clone(),
        bounds,
        free: (0..4).filter(|&i| bounds[i].1 > bounds[i].0).collect(),
    };
    let objective = |x: &[f64]| {
        let f = space.decode(x);
        weighted_error(&target.targets, &achieved(&target.targets, &f))
    };
    let start = space.encode(base);
    let mut search = Search {
        objective: &objective,
        budget,
        evaluations: 0,
        best: (start.clone(), f64::INFINITY),
    };
    let converged = if space.free.is_empty() {
        search.eval(&start).is_ok()
    } else {
        search.run(&start).is_ok()
    };
    let (x, objective_value) = search.best.clone();
    let friction = space.decode(&x);
    let etas = achieved(&target.targets, &friction);
    let residuals = target
        .targets
        .iter()
        .zip(&etas)
        .map(|(t, eta)| Residual {
            name: t.scenario.name.clone(),
            target_percent: t.eta_percent,
            achieved_percent: eta.unwrap_or(f64::NAN),
            weight: t.weight,
        })
        .collect();
    Ok(CalibrationResult {
        friction,
        residuals,
        objective: objective_value,
        evaluations: search.evaluations,
        converged,
    })
}
