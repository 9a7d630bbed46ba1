//! Four-phase sliding gait: advance each group in turn, then retract all.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::model::{ValidationReport, Validate};

const SUM_TOL_MM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "group")]
pub enum PhaseLabel {
    Advance(usize),
    RetractAll,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Advance(g) => write!(f, "advance-group-{}", g + 1),
            Self::RetractAll => f.write_str("retract-all"),
        }
    }
}

/// Body-frame displacement of every group over one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitPhase {
    pub label: PhaseLabel,
    pub deltas_mm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSchedule {
    pub phases: Vec<GaitPhase>,
    pub stroke_mm: f64,
}

impl GaitSchedule {
    pub fn n_groups(&self) -> usize {
        self.phases.first().map_or(0, |p| p.deltas_mm.len())
    }

    /// Same schedule with group `g` renamed `(g + shift) mod n`.
    pub fn relabeled(&self, shift: usize) -> Self {
        let n = self.n_groups();
        let phases = self
            .phases
            .iter()
            .map(|p| {
                let mut deltas = vec![0.0; n];
                for (g, d) in p.deltas_mm.iter().enumerate() {
                    deltas[(g + shift) % n] = *d;
                }
                let label = match p.label {
                    PhaseLabel::Advance(g) => PhaseLabel::Advance((g + shift) % n),
                    PhaseLabel::RetractAll => PhaseLabel::RetractAll,
                };
                GaitPhase {
                    label,
                    deltas_mm: deltas,
                }
            })
            .collect();
        Self {
            phases,
            stroke_mm: self.stroke_mm,
        }
    }

    /// Plain-text phase table, one row per phase.
    pub fn table(&self) -> String {
        let mut out = String::from("phase,label");
        for g in 0..self.n_groups() {
            out.push_str(&format!(",group_{}_mm", g + 1));
        }
        out.push('\n');
        for (i, p) in self.phases.iter().enumerate() {
            out.push_str(&format!("{},{}", i + 1, p.label));
            for d in &p.deltas_mm {
                out.push_str(&format!(",{d}"));
            }
            out.push('\n');
        }
        out
    }
}

/// `n_groups` single-group advances of `+stroke` followed by a `-stroke` retract of all groups.
pub fn canonical_schedule(n_groups: usize, stroke_mm: f64) -> Result<GaitSchedule, DomainError> {
    if n_groups < 2 {
        return Err(DomainError::Gait(format!(
            "n_groups must be >= 2, got {n_groups}"
        )));
    }
    if !(stroke_mm > 0.0) || !stroke_mm.is_finite() {
        return Err(DomainError::NonPositive {
            what: "stroke_mm",
            value: stroke_mm,
        });
    }
    let mut phases: Vec<GaitPhase> = (0..n_groups)
        .map(|g| {
            let mut deltas_mm = vec![0.0; n_groups];
            deltas_mm[g] = stroke_mm;
            GaitPhase {
                label: PhaseLabel::Advance(g),
                deltas_mm,
            }
        })
        .collect();
    phases.push(GaitPhase {
        label: PhaseLabel::RetractAll,
        deltas_mm: vec![-stroke_mm; n_groups],
    });
    Ok(GaitSchedule { phases, stroke_mm })
}

/// Checks that groups return to their start and each phase moves as labelled.
pub fn validate_schedule(s: &GaitSchedule) -> ValidationReport {
    let mut r = ValidationReport::default();
    let n = s.n_groups();
    if s.phases.is_empty() {
        r.push("phases", "schedule has no phases");
        return r;
    }
    if s.phases.iter().any(|p| p.deltas_mm.len() != n) {
        r.push("phases", "every phase lists one delta per group");
        return r;
    }
    let nonzero: Vec<String> = (0..n)
        .filter(|&g| s.phases.iter().map(|p| p.deltas_mm[g]).sum::<f64>().abs() > SUM_TOL_MM)
        .map(|g| (g + 1).to_string())
        .collect();
    if !nonzero.is_empty() {
        r.push(
            "phases",
            format!("group sums nonzero for groups {}", nonzero.join(",")),
        );
    }
    for (i, p) in s.phases.iter().enumerate() {
        let path = format!("phases[{i}]");
        let moving: Vec<usize> = (0..n).filter(|&g| p.deltas_mm[g] != 0.0).collect();
        let all_equal = p.deltas_mm.iter().all(|d| *d == p.deltas_mm[0]);
        if moving.len() == n && n > 1 {
            if !all_equal {
                r.push(path, "all groups move equally in a retract phase");
            }
        } else if moving.len() != 1 {
            r.push(path, "exactly one group moves per advance phase");
        }
    }
    r
}

impl Validate for GaitSchedule {
    fn validate(&self) -> ValidationReport {
        validate_schedule(self)
    }
}

/// Monotone map from phase coordinate τ ∈ [0, 1] to completed fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    #[default]
    Linear,
    Smoothstep,
}

impl Ramp {
    pub fn at(self, tau: f64) -> f64 {
        let t = tau.clamp(0.0, 1.0);
        match self {
            Self::Linear => t,
            Self::Smoothstep => t * t * (3.0 - 2.0 * t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_three_groups() {
        let s = canonical_schedule(3, 10.0).unwrap();
        let d: Vec<Vec<f64>> = s.phases.iter().map(|p| p.deltas_mm.clone()).collect();
        assert_eq!(
            d,
            vec![
                vec![10.0, 0.0, 0.0],
                vec![0.0, 10.0, 0.0],
                vec![0.0, 0.0, 10.0],
                vec![-10.0, -10.0, -10.0]
            ]
        );
        assert!(validate_schedule(&s).is_ok());
    }

    #[test]
    fn canonical_two_groups() {
        let s = canonical_schedule(2, 5.0).unwrap();
        assert_eq!(s.phases.len(), 3);
        assert_eq!(s.phases[2].deltas_mm, vec![-5.0, -5.0]);
        assert_eq!(s.phases[1].label, PhaseLabel::Advance(1));
    }

    #[test]
    fn invalid_inputs() {
        assert!(canonical_schedule(3, 0.0).is_err());
        assert!(canonical_schedule(1, 10.0).is_err());
    }

    #[test]
    fn unbalanced_groups_reported() {
        let s = GaitSchedule {
            phases: vec![
                GaitPhase {
                    label: PhaseLabel::Advance(0),
                    deltas_mm: vec![10.0, 0.0, 0.0],
                },
                GaitPhase {
                    label: PhaseLabel::RetractAll,
                    deltas_mm: vec![-10.0, -10.0, -10.0],
                },
            ],
            stroke_mm: 10.0,
        };
        let r = validate_schedule(&s);
        assert!(r.contains("group sums nonzero for groups 2,3"), "{r}");
    }

    #[test]
    fn unequal_retract_reported() {
        let mut s = canonical_schedule(3, 10.0).unwrap();
        s.phases[3].deltas_mm = vec![-10.0, -9.0, -11.0];
        assert!(validate_schedule(&s).contains("all groups move equally"));
    }

    #[test]
    fn table_has_one_row_per_phase() {
        let t = canonical_schedule(3, 10.0).unwrap().table();
        assert_eq!(t.lines().count(), 5);
        assert!(t.contains("4,retract-all,-10,-10,-10"));
    }

    #[test]
    fn relabel_rotates_groups() {
        let s = canonical_schedule(3, 10.0).unwrap().relabeled(1);
        assert_eq!(s.phases[0].deltas_mm, vec![0.0, 10.0, 0.0]);
        assert_eq!(s.phases[0].label, PhaseLabel::Advance(1));
        assert!(validate_schedule(&s).is_ok());
    }

    #[test]
    fn ramps_are_monotone_and_pinned() {
        for r in [Ramp::Linear, Ramp::Smoothstep] {
            assert_eq!(r.at(0.0), 0.0);
            assert_eq!(r.at(1.0), 1.0);
            let v: Vec<f64> = (0..=100).map(|i| r.at(i as f64 / 100.0)).collect();
            assert!(v.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
