//! Sequential trials: dyads drawn with replacement, learners carried across them.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{run_dyad, Controller, Fixed, MultiAgentPolicy, SingleAgentPolicy};
use crate::env::{FixedProbPolicy, Testbed, VariantKind, HORIZON};
use crate::error::{config, Result};
use crate::rl::RlsviConfig;
use crate::seed::SeedTree;

/// Largest tolerated gap between the testbed STE and the trial's target.
pub const STE_MISMATCH_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Algorithm {
    SingleAgent,
    MultiAgent,
    MultiAgentSurrogate,
    UniformRandom,
    FixedProb { p_aya: f64, p_care: f64, p_rel: f64 },
    OptimalApprox,
}

impl Algorithm {
    pub const LEARNERS: [Algorithm; 3] = [Algorithm::SingleAgent, Algorithm::MultiAgent, Algorithm::MultiAgentSurrogate];

    pub fn label(&self) -> String {
        match self {
            Algorithm::SingleAgent => "single_agent".into(),
            Algorithm::MultiAgent => "multi_agent".into(),
            Algorithm::MultiAgentSurrogate => "multi_agent_surrogate".into(),
            Algorithm::UniformRandom => "uniform_random".into(),
            Algorithm::FixedProb { p_aya, p_care, p_rel } => format!("fixed_prob_{p_aya}_{p_care}_{p_rel}"),
            Algorithm::OptimalApprox => "optimal_approx".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Algorithm::FixedProb { p_aya, p_care, p_rel } = *self {
            if [p_aya, p_care, p_rel].iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(config(format!("fixed probabilities must lie in [0, 1]: {p_aya}, {p_care}, {p_rel}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub algorithm: Algorithm,
    #[serde(default = "default_n_dyads")]
    pub n_dyads: usize,
    #[serde(default = "default_n_runs")]
    pub n_runs: usize,
    pub ste_target: f64,
    #[serde(default = "default_variant")]
    pub variant: VariantKind,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub rlsvi: RlsviConfig,
}

fn default_n_dyads() -> usize {
    25
}
fn default_n_runs() -> usize {
    1000
}
fn default_variant() -> VariantKind {
    VariantKind::Vanilla
}

impl TrialConfig {
    pub fn new(algorithm: Algorithm, ste_target: f64) -> Self {
        TrialConfig {
            algorithm,
            n_dyads: default_n_dyads(),
            n_runs: default_n_runs(),
            ste_target,
            variant: default_variant(),
            master_seed: 0,
            rlsvi: RlsviConfig::default(),
        }
    }

    /// Same trial with a different algorithm, as used for the paired baseline.
    pub fn with_algorithm(&self, algorithm: Algorithm) -> Self {
        TrialConfig { algorithm, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dyads == 0 {
            return Err(config("n_dyads must be at least 1"));
        }
        self.algorithm.validate()
    }
}

/// Adherence of every slot of every dyad in one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    /// Population indices in recruitment order.
    pub dyads: Vec<usize>,
    /// `dyads.len() * HORIZON` outcomes, dyad-major.
    pub adherence: Vec<u8>,
}

impl RunRecord {
    pub fn dyad_totals(&self) -> Vec<u32> {
        self.adherence.chunks(HORIZON).map(|c| c.iter().map(|&a| u32::from(a)).sum()).collect()
    }

    /// Running adherence sum after each dyad.
    pub fn cumulative(&self) -> Vec<u32> {
        self.dyad_totals()
            .into_iter()
            .scan(0, |acc, t| {
                *acc += t;
                Some(*acc)
            })
            .collect()
    }

    pub fn total(&self) -> u32 {
        self.adherence.iter().map(|&a| u32::from(a)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub config: TrialConfig,
    /// STE of the testbed the trial ran on.
    pub ste: f64,
    pub runs: Vec<RunRecord>,
}

impl RunMetrics {
    pub fn n_dyads(&self) -> usize {
        self.config.n_dyads
    }

    /// Mean adherence rate over all slots and runs.
    pub fn adherence_rate(&self) -> f64 {
        let total: u64 = self.runs.iter().map(|r| u64::from(r.total())).sum();
        total as f64 / (self.runs.len() * self.config.n_dyads * HORIZON) as f64
    }
}

fn controller<'a>(algorithm: Algorithm, testbed: &'a Testbed, rlsvi: RlsviConfig) -> Result<Box<dyn Controller + Send + 'a>> {
    Ok(match algorithm {
        Algorithm::SingleAgent => Box::new(SingleAgentPolicy::new(rlsvi)?),
        Algorithm::MultiAgent => Box::new(MultiAgentPolicy::new(false, rlsvi)?),
        Algorithm::MultiAgentSurrogate => Box::new(MultiAgentPolicy::new(true, rlsvi)?),
        Algorithm::UniformRandom => Box::new(Fixed(FixedProbPolicy::uniform(0.5))),
        Algorithm::FixedProb { p_aya, p_care, p_rel } => Box::new(Fixed(FixedProbPolicy::new(p_aya, p_care, p_rel))),
        Algorithm::OptimalApprox => Box::new(Fixed(&testbed.optimal)),
    })
}

/// Seeds of run `r`: the dyad sequence and the per-dyad environment streams
/// depend only on the master seed and `r`, so every algorithm run with the
/// same master seed meets the same dyads and the same environment noise.
pub fn run_seed(master_seed: u64, run: usize) -> SeedTree {
    SeedTree::new(master_seed).child(run as u64)
}

fn run_once(cfg: &TrialConfig, testbed: &Testbed, run: usize) -> Result<RunRecord> {
    let node = run_seed(cfg.master_seed, run);
    let mut pick = node.named("dyads").rng();
    let dyads: Vec<usize> = (0..cfg.n_dyads).map(|_| pick.random_range(0..testbed.population.len())).collect();
    let env = node.named("env");
    let mut policy_rng = node.named("policy").rng();
    let mut ctl = controller(cfg.algorithm, testbed, cfg.rlsvi)?;
    let mut adherence = Vec::with_capacity(cfg.n_dyads * HORIZON);
    for (k, &i) in dyads.iter().enumerate() {
        let obs = run_dyad(ctl.as_mut(), &testbed.population[i], env.child(k as u64).rng(), &mut policy_rng)?;
        adherence.extend_from_slice(&obs.adherence);
    }
    Ok(RunRecord { dyads, adherence })
}

/// Runs `cfg.n_runs` independent trials on `testbed`.
pub fn run_trial(cfg: &TrialConfig, testbed: &Testbed) -> Result<RunMetrics> {
    cfg.validate()?;
    if testbed.population.is_empty() {
        return Err(config("testbed population is empty"));
    }
    if (testbed.ste - cfg.ste_target).abs() > STE_MISMATCH_TOLERANCE {
        return Err(config(format!("testbed STE {:.4} does not match target {}", testbed.ste, cfg.ste_target)));
    }
    if testbed.kind != cfg.variant {
        return Err(config(format!("testbed variant {} does not match trial variant {}", testbed.kind.label(), cfg.variant.label())));
    }
    let runs = (0..cfg.n_runs).into_par_iter().map(|r| run_once(cfg, testbed, r)).collect::<Result<Vec<_>>>()?;
    Ok(RunMetrics { config: *cfg, ste: testbed.ste, runs })
}
