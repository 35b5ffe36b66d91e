//! Joint user association, UAV placement and SIM phase-shift optimization.

pub mod ao;
pub mod association;
pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod location;
pub mod phase;
pub mod physics;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
