//! Simulator and learners for multi-timescale dyadic adherence interventions.

pub mod agents;
pub mod env;
pub mod error;
pub mod harness;
pub mod rl;
pub mod seed;

pub use error::{Error, Result};
pub use seed::{SeedTree, SimRng};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
