//! Policy architectures: one flat learner, or one learner per component with
//! naive or surrogate rewards for the slower components.

pub mod controller;
pub mod multi;
pub mod single;
pub mod snapshot;
pub mod state;
pub mod surrogate;

pub use controller::{run_dyad, uniform_random, Controller, Fixed};
pub use multi::{ComponentMode, InterventionCounts, MultiAgentPolicy};
pub use single::SingleAgentPolicy;
pub use snapshot::PolicySnapshot;
pub use state::{AgentKind, CurrentActions};
pub use surrogate::{SurrogateRewardModel, CARE_PRIOR, REL_PRIOR};

#[cfg(test)]
mod tests;
