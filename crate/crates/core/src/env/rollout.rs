//! Non-learning policies and Monte Carlo rollouts over a population.

use rand::Rng;

use super::action::ActionBundle;
use super::clock::ClockIndex;
use super::model::DyadParams;
use super::sim::{DyadSimulator, DyadState};
use crate::seed::{SeedTree, SimRng};

/// A fixed (non-learning) decision rule over the simulator state.
pub trait EnvPolicy {
    fn decide(&self, clock: ClockIndex, state: &DyadState, rng: &mut SimRng) -> ActionBundle;
}

impl<P: EnvPolicy + ?Sized> EnvPolicy for &P {
    fn decide(&self, clock: ClockIndex, state: &DyadState, rng: &mut SimRng) -> ActionBundle {
        (**self).decide(clock, state, rng)
    }
}

/// Never intervenes.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoIntervention;

impl EnvPolicy for NoIntervention {
    fn decide(&self, clock: ClockIndex, _: &DyadState, _: &mut SimRng) -> ActionBundle {
        ActionBundle::none(clock)
    }
}

/// Independent Bernoulli draws per component.
///
/// Three uniforms are consumed at every decision time whatever the clock, so the
/// policy stream stays aligned across policies with different probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedProbPolicy {
    pub p_aya: f64,
    pub p_care: f64,
    pub p_rel: f64,
}

impl FixedProbPolicy {
    pub fn new(p_aya: f64, p_care: f64, p_rel: f64) -> Self {
        FixedProbPolicy { p_aya, p_care, p_rel }
    }

    pub fn uniform(p: f64) -> Self {
        Self::new(p, p, p)
    }
}

impl EnvPolicy for FixedProbPolicy {
    fn decide(&self, clock: ClockIndex, _: &DyadState, rng: &mut SimRng) -> ActionBundle {
        let u: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        ActionBundle::gated(clock, u[0] < self.p_aya, u[1] < self.p_care, u[2] < self.p_rel)
    }
}

/// Cumulative adherence of one dyad under `policy`.
pub fn rollout<P: EnvPolicy + ?Sized>(params: &DyadParams, policy: &P, env_rng: SimRng, policy_rng: &mut SimRng) -> u32 {
    let mut sim = DyadSimulator::new(params, env_rng);
    let mut total = 0;
    while let Some(c) = sim.clock() {
        let a = policy.decide(c, sim.state(), policy_rng);
        // Actions come from `gated`, so they always match the clock.
        let o = sim.step(&a).expect("policy produced actions for the wrong clock");
        total += u32::from(o.adherence);
    }
    total
}

/// Paired Monte Carlo evaluation: rollout `k` of every policy uses the same
/// dyad draw and the same environment stream.
///
/// Returns `totals[policy][k]`.
pub fn evaluate_paired(population: &[DyadParams], policies: &[&dyn EnvPolicy], n_rollouts: usize, seed: u64) -> Vec<Vec<u32>> {
    let root = SeedTree::new(seed);
    let mut pick = root.named("dyads").rng();
    let mut out = vec![Vec::with_capacity(n_rollouts); policies.len()];
    for k in 0..n_rollouts {
        let dyad = &population[pick.random_range(0..population.len())];
        let node = root.child(k as u64);
        for (j, pol) in policies.iter().enumerate() {
            let mut prng = node.named("policy").rng();
            out[j].push(rollout(dyad, *pol, node.named("env").rng(), &mut prng));
        }
    }
    out
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
