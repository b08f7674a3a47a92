//! Generative dyadic environment.

pub mod action;
pub mod calibration;
pub mod clock;
pub mod io;
pub mod model;
pub mod optimal;
pub mod population;
pub mod rollout;
pub mod sim;

pub use action::ActionBundle;
pub use calibration::{calibrate_c_treat, calibrate_population, compute_ste, testbed_at, SteSettings, Testbed};
pub use clock::{ClockIndex, DecisionKind, DAYS, DAYS_TOTAL, HORIZON, SLOTS, WEEKS};
pub use model::{DyadParams, Role};
pub use optimal::{approx_optimal_policy, QLearningConfig, TabularPolicy};
pub use population::{generate_population, impute_population, make_variant, PopulationConfig, TestbedVariant, VariantKind};
pub use rollout::{EnvPolicy, FixedProbPolicy, NoIntervention};
pub use sim::{DyadSimulator, DyadState, Observations};
