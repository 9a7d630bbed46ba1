//! Cross-checks the integrator against an independent active-set oracle.
//!
//! The oracle advances in very fine steps. In each step it assumes a
//! stick/slide mode for every contact, solves the now linear tube balance
//! directly, and flips modes (one violation at a time) until the solution is
//! consistent: sticking contacts inside the static cone, sliding contacts
//! still moving in their sliding direction.

use ovisim::contact::{ContactState, SliderContact};
use ovisim::dynamics::{run_cycles, run_phase, BristleState, RunState, Setup, SolverSettings};
use ovisim::experiments::scenarios::straight_at_delta;
use ovisim::gait::{canonical_schedule, GaitPhase, PhaseLabel};
use ovisim::{FrictionParams, LoadCase, RobotSpec, StiffnessLaw};

#[derive(Clone, Copy)]
struct Contact {
    group: usize,
    n: f64,
}

#[derive(Clone, Copy)]
struct Slot {
    z: f64,
    slide: f64,
}

struct Oracle {
    contacts: Vec<Contact>,
    slots: Vec<Slot>,
    mu_s: f64,
    mu_k: f64,
    k: Vec<f64>,
    drive: f64,
    resistance: f64,
    holder_slips: usize,
}

impl Oracle {
    fn new(contacts: Vec<Contact>, f: &FrictionParams, drive: f64, resistance: f64) -> Self {
        let k = contacts.iter().map(|c| f.contact_stiffness(c.n)).collect();
        Self {
            slots: vec![Slot { z: 0.0, slide: 0.0 }; contacts.len()],
            contacts,
            mu_s: f.mu_s,
            mu_k: f.mu_k,
            k,
            drive,
            resistance,
            holder_slips: 0,
        }
    }

    /// Tube increment for the given modes.
    fn solve(&self, modes: &[f64], inc: &[f64]) -> f64 {
        let mut a = self.drive;
        let mut b = 0.0;
        for (i, c) in self.contacts.iter().enumerate() {
            if modes[i] == 0.0 {
                a += self.k[i] * (self.slots[i].z + inc[c.group]);
                b += self.k[i];
            } else {
                a += modes[i] * self.mu_k * c.n;
            }
        }
        if a.abs() <= self.resistance {
            return 0.0;
        }
        assert!(b > 0.0, "oracle cannot balance with every contact sliding");
        (a - a.signum() * self.resistance) / b
    }

    fn step(&mut self, inc: &[f64], moving: &[usize]) -> f64 {
        let mut modes: Vec<f64> = self.slots.iter().map(|s| s.slide).collect();
        let mut fresh = vec![false; modes.len()];
        for _ in 0..100 {
            let dx = self.solve(&modes, inc);
            let mut flip = None;
            for (i, c) in self.contacts.iter().enumerate() {
                let u = inc[c.group] - dx;
                if modes[i] == 0.0 {
                    let trial = self.k[i] * (self.slots[i].z + u);
                    if trial.abs() > self.mu_s * c.n + 1e-9 {
                        flip = Some((i, trial.signum()));
                        break;
                    }
                } else if u * modes[i] < 0.0 {
                    flip = Some((i, 0.0));
                    break;
                }
            }
            match flip {
                Some((i, m)) => {
                    if m != 0.0 {
                        fresh[i] = true;
                    }
                    modes[i] = m;
                }
                None => {
                    for (i, c) in self.contacts.iter().enumerate() {
                        let u = inc[c.group] - dx;
                        if modes[i] == 0.0 {
                            self.slots[i] = Slot { z: self.slots[i].z + u, slide: 0.0 };
                        } else {
                            if fresh[i] && !moving.contains(&c.group) {
                                self.holder_slips += 1;
                            }
                            self.slots[i] = Slot {
                                z: modes[i] * self.mu_k * c.n / self.k[i],
                                slide: modes[i],
                            };
                        }
                    }
                    return dx;
                }
            }
        }
        panic!("oracle mode search did not settle");
    }

    fn phase(&mut self, deltas: &[f64], steps: usize) -> f64 {
        let inc: Vec<f64> = deltas.iter().map(|d| d / steps as f64).collect();
        let moving: Vec<usize> = if deltas.iter().all(|d| *d != 0.0) {
            (0..deltas.len()).collect()
        } else {
            (0..deltas.len()).filter(|&g| deltas[g] != 0.0).collect()
        };
        (0..steps).map(|_| self.step(&inc, &moving)).sum()
    }
}

const FINE: usize = 20_000;

fn contact_state(contacts: &[Contact]) -> ContactState {
    ContactState {
        sliders: contacts
            .iter()
            .enumerate()
            .map(|(i, c)| SliderContact {
                slider: i,
                group: c.group,
                angle_deg: 0.0,
                in_contact: true,
                inflation_n: c.n,
                gravity_n: 0.0,
            })
            .collect(),
        station_z_mm: 0.0,
        local_tube_diameter_mm: 15.0,
        free_diameter_mm: 15.0,
        inclination_deg: 0.0,
    }
}

fn phase_pair(contacts: Vec<Contact>, f: &FrictionParams, load: &LoadCase, deltas: Vec<f64>, label: PhaseLabel) {
    let mut oracle = Oracle::new(contacts.clone(), f, load.drive_n(0.0), load.resistance_n(0.0));
    let expected = oracle.phase(&deltas, FINE);
    let cs = contact_state(&contacts);
    let got = run_phase(
        &BristleState::relaxed(contacts.len()),
        &cs,
        &GaitPhase { label, deltas_mm: deltas },
        f,
        load,
        &SolverSettings::default(),
    )
    .unwrap();
    assert!(
        (got.tube_displacement_mm - expected).abs() < 1e-3,
        "integrator {} vs oracle {expected}",
        got.tube_displacement_mm
    );
}

#[test]
fn creep_phase_matches_oracle() {
    let contacts = vec![
        Contact { group: 0, n: 2.0 },
        Contact { group: 1, n: 2.0 },
        Contact { group: 2, n: 2.0 },
    ];
    for law in [StiffnessLaw::PerContact, StiffnessLaw::LoadProportional] {
        let f = FrictionParams::new(0.5, 0.35, 0.3).with_law(law);
        phase_pair(contacts.clone(), &f, &LoadCase::free(), vec![10.0, 0.0, 0.0], PhaseLabel::Advance(0));
    }
}

#[test]
fn movers_majority_matches_oracle() {
    let contacts = vec![
        Contact { group: 0, n: 2.0 },
        Contact { group: 0, n: 2.0 },
        Contact { group: 1, n: 2.0 },
    ];
    let f = FrictionParams::new(0.5, 0.35, 0.3);
    let mut oracle = Oracle::new(contacts.clone(), &f, 0.0, 0.0);
    oracle.phase(&[10.0, 0.0], FINE);
    assert!(oracle.holder_slips > 0);
    phase_pair(contacts, &f, &LoadCase::free(), vec![10.0, 0.0], PhaseLabel::Advance(0));
}

#[test]
fn resisted_retract_matches_oracle_and_closed_form() {
    let contacts = vec![
        Contact { group: 0, n: 1.5 },
        Contact { group: 1, n: 2.5 },
        Contact { group: 2, n: 4.0 },
    ];
    let f = FrictionParams::new(0.5, 0.3, 0.4);
    let load = LoadCase {
        cart_mass_kg: 1.0,
        payload_mass_kg: 0.5,
        cart_resistance_coeff: 0.02,
        axial_external_force_n: 0.0,
    };
    let mut oracle = Oracle::new(contacts.clone(), &f, 0.0, load.resistance_n(0.0));
    let x = oracle.phase(&[-10.0; 3], FINE);
    let k_total: f64 = contacts.iter().map(|c| f.contact_stiffness(c.n)).sum();
    assert!((x + 10.0 - load.resistance_n(0.0) / k_total).abs() < 1e-6);
    phase_pair(contacts, &f, &load, vec![-10.0; 3], PhaseLabel::RetractAll);
}

#[test]
fn unequal_contacts_with_drive_match_oracle() {
    let contacts = vec![
        Contact { group: 0, n: 3.0 },
        Contact { group: 1, n: 1.0 },
        Contact { group: 1, n: 2.0 },
        Contact { group: 2, n: 2.5 },
    ];
    let f = FrictionParams::new(0.6, 0.25, 0.5);
    let load = LoadCase {
        cart_mass_kg: 1.0,
        payload_mass_kg: 0.0,
        cart_resistance_coeff: 0.01,
        axial_external_force_n: 0.3,
    };
    for g in 0..3 {
        let mut d = vec![0.0; 3];
        d[g] = 8.0;
        phase_pair(contacts.clone(), &f, &load, d, PhaseLabel::Advance(g));
    }
}

#[test]
fn full_cycles_match_oracle() {
    let robot = RobotSpec::default();
    let f = FrictionParams::new(0.5, 0.287, 0.253);
    let scenario = straight_at_delta(&robot, 3.0, 1.2).unwrap();
    let setup = Setup {
        schedule: canonical_schedule(3, robot.stroke_mm).unwrap(),
        ..scenario.setup(&f).unwrap()
    };
    let mut state = RunState::new(robot.n_sliders(), scenario.station0_mm);
    let cycles = run_cycles(3, &mut state, &setup).unwrap();

    let contacts_state = ovisim::dynamics::contacts_at(&setup, &RunState::new(9, 20.0), PhaseLabel::RetractAll).unwrap();
    let contacts: Vec<Contact> = contacts_state
        .sliders
        .iter()
        .map(|s| Contact {
            group: s.group,
            n: s.normal_force_n(),
        })
        .collect();
    let load = &setup.load;
    let mut oracle = Oracle::new(contacts, &f, load.drive_n(0.0), load.resistance_n(0.0));
    for c in &cycles {
        let net: f64 = setup
            .schedule
            .phases
            .iter()
            .map(|p| oracle.phase(&p.deltas_mm, FINE))
            .sum();
        assert!(
            (c.net_tube_displacement_mm - net).abs() < 2e-3,
            "cycle {}: integrator {} vs oracle {net}",
            c.index,
            c.net_tube_displacement_mm
        );
    }
}
