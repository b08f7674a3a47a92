//! Ablations over testbed variants and the collaboration analyses.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{cumulative_improvement, pooled_se, summarize, Aggregation, ImprovementCurve, Summary};
use super::trial::{run_trial, Algorithm, TrialConfig};
use crate::agents::{run_dyad, ComponentMode, MultiAgentPolicy};
use crate::env::rollout::{evaluate_paired, mean_se};
use crate::env::{DyadParams, EnvPolicy, FixedProbPolicy, Testbed, VariantKind};
use crate::error::{config, Result};
use crate::rl::RlsviConfig;
use crate::seed::SeedTree;

/// Intervention components, indexed as in [`MultiAgentPolicy::modes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Aya,
    Care,
    Rel,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::Aya => 0,
            Component::Care => 1,
            Component::Rel => 2,
        }
    }

    pub fn label(self) -> &'static str {
        ["aya", "care", "rel"][self.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollaborationResult {
    pub trained: Component,
    pub fixed: FixedProbs,
    /// Fraction of the trained component's decisions that sent an intervention.
    pub rate: f64,
    pub decisions: u64,
}

/// Probabilities of the components that are not trained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedProbs {
    pub p_aya: f64,
    pub p_care: f64,
    pub p_rel: f64,
}

impl FixedProbs {
    fn get(&self, c: Component) -> f64 {
        [self.p_aya, self.p_care, self.p_rel][c.index()]
    }
}

/// Trains one surrogate-reward component over `n_dyads` dyads drawn with
/// replacement while the other two act with fixed probabilities.
pub fn collaboration_experiment(
    testbed: &Testbed,
    trained: Component,
    fixed: FixedProbs,
    n_dyads: usize,
    rlsvi: RlsviConfig,
    seed: u64,
) -> Result<CollaborationResult> {
    if trained == Component::Aya {
        return Err(config("only the relationship and carepartner components can be trained alone"));
    }
    if [fixed.p_aya, fixed.p_care, fixed.p_rel].iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(config("fixed probabilities must lie in [0, 1]"));
    }
    if testbed.population.is_empty() {
        return Err(config("testbed population is empty"));
    }
    let modes = [Component::Aya, Component::Care, Component::Rel]
        .map(|c| if c == trained { ComponentMode::Learn } else { ComponentMode::Fixed(fixed.get(c)) });
    let mut policy = MultiAgentPolicy::new(true, rlsvi)?.with_modes(modes)?;
    let root = SeedTree::new(seed);
    let mut pick = root.named("dyads").rng();
    let env = root.named("env");
    let mut prng = root.named("policy").rng();
    for k in 0..n_dyads {
        let p = &testbed.population[pick.random_range(0..testbed.population.len())];
        run_dyad(&mut policy, p, env.child(k as u64).rng(), &mut prng)?;
    }
    let i = trained.index();
    Ok(CollaborationResult { trained, fixed, rate: policy.counts.rate(i), decisions: policy.counts.decisions[i] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    /// Mean adherence per dyad.
    pub mean: f64,
    pub se: f64,
}

/// Evaluates fixed-probability policies that differ only in `component`'s
/// probability, with paired rollouts.
pub fn fixed_prob_sweep(
    population: &[DyadParams],
    base: FixedProbs,
    component: Component,
    grid: &[f64],
    n_rollouts: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(config("sweep probabilities must lie in [0, 1]"));
    }
    let policies: Vec<FixedProbPolicy> = grid
        .iter()
        .map(|&p| {
            let mut q = [base.p_aya, base.p_care, base.p_rel];
            q[component.index()] = p;
            FixedProbPolicy::new(q[0], q[1], q[2])
        })
        .collect();
    let refs: Vec<&dyn EnvPolicy> = policies.iter().map(|p| p as &dyn EnvPolicy).collect();
    let totals = evaluate_paired(population, &refs, n_rollouts, seed);
    Ok(grid
        .iter()
        .zip(totals)
        .map(|(&p, t)| {
            let xs: Vec<f64> = t.into_iter().map(f64::from).collect();
            let (mean, se) = mean_se(&xs);
            SweepPoint { p, mean, se }
        })
        .collect())
}

/// Grid point with the highest mean; the first one on ties.
pub fn best_probability(points: &[SweepPoint]) -> Option<f64> {
    points.iter().fold(None, |best: Option<&SweepPoint>, x| match best {
        Some(b) if b.mean >= x.mean => Some(b),
        _ => Some(x),
    })
    .map(|b| b.p)
}

/// One testbed of an ablation grid with the STE it was calibrated for.
#[derive(Debug, Clone, Copy)]
pub struct AblationCell<'a> {
    pub ste_target: f64,
    pub testbed: &'a Testbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    pub summary: Summary,
    pub summed: ImprovementCurve,
    pub per_dyad: ImprovementCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub variant: VariantKind,
    pub ste_target: f64,
    pub ste: f64,
    pub seed: u64,
    pub results: Vec<AlgorithmResult>,
    /// For a no-mediator cell: whether the surrogate and naive multi-agent
    /// end-of-trial means lie within one pooled standard error.
    pub surrogate_matches_naive: Option<bool>,
}

impl CellReport {
    pub fn label(&self) -> String {
        format!("{}_ste{}", self.variant.label(), self.ste_target)
    }

    pub fn result(&self, a: Algorithm) -> Option<&AlgorithmResult> {
        self.results.iter().find(|r| r.algorithm == a)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AblationReport {
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationSettings {
    pub n_runs: usize,
    pub n_dyads: usize,
    pub rlsvi: RlsviConfig,
    pub seed: u64,
}

/// Seed of a grid cell; algorithms inside a cell share it, and so the dyad
/// sequences and environment streams of their runs.
pub fn cell_seed(seed: u64, variant: VariantKind, ste_target: f64) -> u64 {
    SeedTree::new(seed).named(&format!("{}_{ste_target}", variant.label())).value()
}

/// Runs `algorithms` against the uniform random baseline on every cell.
pub fn ablation_suite(cells: &[AblationCell], algorithms: &[Algorithm], s: &AblationSettings) -> Result<AblationReport> {
    let mut report = AblationReport::default();
    for cell in cells {
        let kind = cell.testbed.kind;
        let seed = cell_seed(s.seed, kind, cell.ste_target);
        let cfg = TrialConfig {
            n_dyads: s.n_dyads,
            n_runs: s.n_runs,
            variant: kind,
            master_seed: seed,
            rlsvi: s.rlsvi,
            ..TrialConfig::new(Algorithm::UniformRandom, cell.ste_target)
        };
        let baseline = run_trial(&cfg, cell.testbed)?;
        let mut results = Vec::with_capacity(algorithms.len());
        for &a in algorithms {
            let m = run_trial(&cfg.with_algorithm(a), cell.testbed)?;
            results.push(AlgorithmResult {
                algorithm: a,
                summary: summarize(&m, &baseline)?,
                summed: cumulative_improvement(&m, &baseline, Aggregation::Summed)?,
                per_dyad: cumulative_improvement(&m, &baseline, Aggregation::PerDyad)?,
            });
            log::info!("{} ste {}: {} done", kind.label(), cell.ste_target, a.label());
        }
        let find = |a| results.iter().find(|r: &&AlgorithmResult| r.algorithm == a).map(|r| r.summary);
        let surrogate_matches_naive = match (kind, find(Algorithm::MultiAgentSurrogate), find(Algorithm::MultiAgent)) {
            (VariantKind::NoMediator, Some(x), Some(y)) => Some((x.improvement - y.improvement).abs() < pooled_se(x.se, y.se)),
            _ => None,
        };
        report.cells.push(CellReport {
            variant: kind,
            ste_target: cell.ste_target,
            ste: cell.testbed.ste,
            seed,
            results,
            surrogate_matches_naive,
        });
    }
    Ok(report)
}
