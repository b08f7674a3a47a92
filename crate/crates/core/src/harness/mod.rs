//! Trials, improvement curves and the experiment grids built on them.

pub mod experiments;
pub mod metrics;
pub mod setup;
pub mod trial;

pub use experiments::{
    ablation_suite, best_probability, cell_seed, collaboration_experiment, fixed_prob_sweep, AblationCell, AblationReport,
    AblationSettings, AlgorithmResult, CellReport, CollaborationResult, Component, FixedProbs, SweepPoint,
};
pub use metrics::{cumulative_improvement, pooled_se, summarize, Aggregation, ImprovementCurve, Summary};
pub use setup::{base_population, calibrated_testbed, calibration_settings};
pub use trial::{run_seed, run_trial, Algorithm, RunMetrics, RunRecord, TrialConfig, STE_MISMATCH_TOLERANCE};

#[cfg(test)]
mod tests;
