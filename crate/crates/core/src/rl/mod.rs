//! Bayesian ridge regression and the RLSVI learner over linear feature maps.

pub mod features;
pub mod ridge;
pub mod rlsvi;

pub use features::{all_actions, greedy_action, greedy_full, ActionCode, FeatureMap, InteractionFeatures};
pub use ridge::{ridge_posterior, FactoredPosterior, GaussianPosterior};
pub use rlsvi::{AgentState, Dataset, RlsviConfig, Transition};
