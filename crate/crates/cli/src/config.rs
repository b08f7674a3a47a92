//! Experiment configuration file.

use dyad_core::env::{PopulationConfig, QLearningConfig, SteSettings, VariantKind};
use dyad_core::harness::{Algorithm, FixedProbs};
use dyad_core::rl::RlsviConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_population_size")]
    pub population_size: usize,
    #[serde(default)]
    pub population: PopulationConfig,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub trial: TrialSection,
    #[serde(default)]
    pub ablation: AblationSection,
    #[serde(default)]
    pub collaboration: CollaborationSection,
}

fn default_population_size() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    pub targets: Vec<f64>,
    pub n_eval: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub q_learning: QLearningConfig,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        let s = SteSettings::default();
        CalibrationSection {
            targets: vec![0.15, 0.3, 0.5],
            n_eval: s.n_eval,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            q_learning: s.q_learning,
        }
    }
}

impl CalibrationSection {
    /// Settings before the seed is derived from the master seed.
    pub fn settings(&self) -> SteSettings {
        SteSettings {
            n_eval: self.n_eval,
            q_learning: self.q_learning,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialSection {
    pub algorithms: Vec<Algorithm>,
    pub n_dyads: usize,
    pub n_runs: usize,
    pub variant: VariantKind,
    pub rlsvi: RlsviConfig,
}

impl Default for TrialSection {
    fn default() -> Self {
        TrialSection {
            algorithms: Algorithm::LEARNERS.to_vec(),
            n_dyads: 25,
            n_runs: 200,
            variant: VariantKind::Vanilla,
            rlsvi: RlsviConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationSection {
    pub variants: Vec<VariantKind>,
}

impl Default for AblationSection {
    fn default() -> Self {
        AblationSection {
            variants: vec![
                VariantKind::Vanilla,
                VariantKind::NoMediator,
                VariantKind::DirectDistressEffect,
                VariantKind::RandomMediator { sd: 0.5 },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollaborationSection {
    /// STE of the testbed the components are trained on.
    pub ste_target: f64,
    pub n_dyads: usize,
    pub replicates: usize,
    /// Probabilities of the varied fixed component.
    pub probs: Vec<f64>,
    /// Probability of the component that is neither trained nor varied.
    pub other_prob: f64,
    /// Grid for the fixed-probability sweep of the game component.
    pub sweep_grid: Vec<f64>,
    pub sweep_rollouts: usize,
}

impl Default for CollaborationSection {
    fn default() -> Self {
        CollaborationSection {
            ste_target: 0.5,
            n_dyads: 1000,
            replicates: 5,
            probs: vec![0.25, 0.75],
            other_prob: 0.5,
            sweep_grid: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            sweep_rollouts: 2000,
        }
    }
}

impl CollaborationSection {
    /// Fixed probabilities when `varied` takes `p`.
    pub fn fixed(&self, varied: dyad_core::harness::Component, p: f64) -> FixedProbs {
        let mut q = [self.other_prob; 3];
        q[varied.index()] = p;
        FixedProbs { p_aya: q[0], p_care: q[1], p_rel: q[2] }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if self.population_size == 0 {
            return Err("population_size must be at least 1".into());
        }
        self.population.validate().map_err(|e| e.to_string())?;
        self.calibration.q_learning.validate().map_err(|e| e.to_string())?;
        if self.calibration.targets.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err("calibration targets must be positive".into());
        }
        if self.trial.n_dyads == 0 {
            return Err("trial.n_dyads must be at least 1".into());
        }
        let probs = self.collaboration.probs.iter().chain(&self.collaboration.sweep_grid).chain([&self.collaboration.other_prob]);
        if probs.into_iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err("collaboration probabilities must lie in [0, 1]".into());
        }
        Ok(())
    }
}
