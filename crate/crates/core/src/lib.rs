//! Prescribed-performance adaptive fixed-time control of a 3-DOF helicopter
//! elevation channel, with settling-time bounds for fixed-time stable systems.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod controller;
pub mod envelope;
pub mod error;
pub mod fxtbounds;
pub mod plant;
pub mod powmath;
pub mod selfcheck;
pub mod sim;
pub mod ubf;

pub use controller::{ChannelController, Gains};
pub use envelope::{EnvelopeConfig, Family, PerformanceFunction};
pub use error::{Error, Result};
pub use plant::{DisturbanceSpec, HeliState, PlantParams, Reference};
pub use powmath::OddRational;
pub use sim::{compute_metrics, run, Baseline, Metrics, Scenario, Trajectory};
pub use ubf::{UbfConfig, UbfVariant};
