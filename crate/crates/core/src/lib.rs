//! Simulation and control library for cooperative locomotion of legged agents
//! coupled through a rigid bar.
//!
//! The crate models each agent as a rigid-body tree with a floating base,
//! builds multi-domain hybrid gait graphs (and their strong products for two
//! agents), runs contact-constrained rollouts with rigid impact resets, and
//! implements both the nominal output-tracking controller and the distributed
//! QP controller that coordinates two agents through a small set of shared
//! measurements.

pub mod analysis;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod gait;
pub mod graph;
pub mod model;
pub mod parallel;
pub mod qp;
pub mod spline;

pub use error::{Error, Result};
