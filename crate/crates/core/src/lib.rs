//! Quasi-static simulation of a three-group sliding in-pipe robot.
//!
//! The robot pushes flexible sliders against the tube wall with mechanical
//! inflators and moves them in a four-phase gait: each group advances alone
//! while the other two hold, then all groups retract together and drag the
//! tube along. Losses come from elastic creep of the holding contacts and
//! from the cart resistance.
//!
//! Start with the runnable programs in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod contact;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gait;
pub mod inflation;
pub mod model;
pub mod output;
pub mod rng;

pub use error::{DomainError, DynamicsError, ExperimentError};
pub use model::{
    FrictionParams, LoadCase, RobotSpec, StiffnessLaw, TubeProfile, TubeShape, Validate,
    ValidationReport, STANDARD_GRAVITY,
};
