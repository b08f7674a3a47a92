//! Approximate optimal policy by offline tabular Q-learning on a discretized
//! state collected under uniformly random interventions.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::ActionBundle;
use super::clock::{ClockIndex, DecisionKind};
use super::model::DyadParams;
use super::rollout::{EnvPolicy, FixedProbPolicy};
use super::sim::{DyadSimulator, DyadState};
use crate::error::{config, Error, Result};
use crate::seed::{SeedTree, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QLearningConfig {
    /// Dyad trajectories in the random-policy dataset.
    pub n_trajectories: usize,
    pub bins: usize,
    pub discount: f64,
    pub max_sweeps: usize,
    pub tolerance: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        QLearningConfig { n_trajectories: 2000, bins: 10, discount: 0.95, max_sweeps: 200, tolerance: 1e-6 }
    }
}

impl QLearningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 || self.max_sweeps == 0 {
            return Err(config("q-learning bins and max_sweeps must be positive"));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(config("q-learning discount must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Equal-width binning of the three numeric features over their observed range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    /// `[distress, b_aya, b_care]`
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub bins: usize,
}

const N_ACTIONS: usize = 8;

impl Discretizer {
    fn fit(rows: &[[f64; 3]], bins: usize) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for r in rows {
            for j in 0..3 {
                lo[j] = lo[j].min(r[j]);
                hi[j] = hi[j].max(r[j]);
            }
        }
        Discretizer { lo, hi, bins }
    }

    /// Bin of feature `j`; values outside the fitted range clamp to the edge bins.
    pub fn bin(&self, j: usize, x: f64) -> usize {
        let w = self.hi[j] - self.lo[j];
        if !(w > 0.0) {
            return 0;
        }
        let b = ((x - self.lo[j]) / w * self.bins as f64).floor();
        (b.max(0.0) as usize).min(self.bins - 1)
    }

    pub fn n_states(&self) -> usize {
        3 * 2 * 2 * self.bins.pow(3)
    }

    pub fn state_index(&self, kind: DecisionKind, f: &Features) -> usize {
        let b = self.bins;
        let mut i = kind.index();
        i = i * 2 + usize::from(f.adherence);
        i = i * b + self.bin(0, f.distress);
        i = i * b + self.bin(1, f.b_aya);
        i = i * b + self.bin(2, f.b_care);
        i * 2 + usize::from(f.relationship)
    }
}

/// The state summary the tabular policy conditions on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Features {
    pub adherence: bool,
    pub distress: f64,
    pub b_aya: f64,
    pub b_care: f64,
    pub relationship: bool,
}

impl Features {
    pub fn of(state: &DyadState) -> Self {
        Features {
            adherence: state.last_adherence,
            distress: state.last_distress,
            b_aya: state.b_aya,
            b_care: state.b_care,
            relationship: state.rel_quality_prev_week,
        }
    }
}

/// Action code: bit 0 AYA, bit 1 carepartner, bit 2 relationship.
fn code(a: &ActionBundle) -> usize {
    usize::from(a.a_aya) | usize::from(a.a_care.unwrap_or(false)) << 1 | usize::from(a.a_rel.unwrap_or(false)) << 2
}

fn n_feasible(kind: DecisionKind) -> usize {
    1 << kind.n_components()
}

fn kind_of_state(s: usize, bins: usize) -> DecisionKind {
    match s / (2 * 2 * bins.pow(3)) {
        0 => DecisionKind::WeekStart,
        1 => DecisionKind::DayStart,
        _ => DecisionKind::Evening,
    }
}

/// Greedy policy over a tabular Q function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularPolicy {
    pub discretizer: Discretizer,
    /// `q[state * 8 + action]`
    pub q: Vec<f64>,
    pub sweeps: usize,
    /// Largest Q change in the final sweep.
    pub final_change: f64,
    pub n_transitions: usize,
}

impl TabularPolicy {
    pub fn action_code(&self, kind: DecisionKind, f: &Features) -> usize {
        let s = self.discretizer.state_index(kind, f);
        let row = &self.q[s * N_ACTIONS..s * N_ACTIONS + n_feasible(kind)];
        let mut best = 0;
        for (a, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = a;
            }
        }
        best
    }
}

impl EnvPolicy for TabularPolicy {
    fn decide(&self, clock: ClockIndex, state: &DyadState, _: &mut SimRng) -> ActionBundle {
        let a = self.action_code(clock.kind(), &Features::of(state));
        ActionBundle::gated(clock, a & 1 != 0, a & 2 != 0, a & 4 != 0)
    }
}

struct Transition {
    kind: DecisionKind,
    features: Features,
    action: usize,
    reward: f64,
    terminal: bool,
}

/// Empirical model: for each visited state-action pair, mean reward and
/// next-state frequencies.
struct EmpiricalModel {
    sa: Vec<usize>,
    reward: Vec<f64>,
    /// CSR layout into `next`/`prob`.
    offsets: Vec<usize>,
    next: Vec<usize>,
    prob: Vec<f64>,
}

fn empirical_model(states: &[usize], trans: &[Transition]) -> EmpiricalModel {
    struct Acc {
        n: f64,
        r: f64,
        next: HashMap<usize, f64>,
    }
    let mut acc: HashMap<usize, Acc> = HashMap::new();
    for (i, t) in trans.iter().enumerate() {
        let key = states[i] * N_ACTIONS + t.action;
        let e = acc.entry(key).or_insert_with(|| Acc { n: 0.0, r: 0.0, next: HashMap::new() });
        e.n += 1.0;
        e.r += t.reward;
        if !t.terminal {
            *e.next.entry(states[i + 1]).or_insert(0.0) += 1.0;
        }
    }
    let mut keys: Vec<usize> = acc.keys().copied().collect();
    keys.sort_unstable();
    let mut m = EmpiricalModel { sa: Vec::new(), reward: Vec::new(), offsets: vec![0], next: Vec::new(), prob: Vec::new() };
    for k in keys {
        let e = &acc[&k];
        m.sa.push(k);
        m.reward.push(e.r / e.n);
        let mut nx: Vec<(usize, f64)> = e.next.iter().map(|(&s, &c)| (s, c / e.n)).collect();
        nx.sort_unstable_by_key(|x| x.0);
        for (s, p) in nx {
            m.next.push(s);
            m.prob.push(p);
        }
        m.offsets.push(m.next.len());
    }
    m
}

/// One synchronous Bellman sweep; returns the largest change.
fn sweep(model: &EmpiricalModel, q: &mut [f64], v: &mut [f64], bins: usize, gamma: f64) -> f64 {
    for (s, vs) in v.iter_mut().enumerate() {
        let k = n_feasible(kind_of_state(s, bins));
        *vs = q[s * N_ACTIONS..s * N_ACTIONS + k].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    let mut change: f64 = 0.0;
    for (i, &sa) in model.sa.iter().enumerate() {
        let mut ev = 0.0;
        for j in model.offsets[i]..model.offsets[i + 1] {
            ev += model.prob[j] * v[model.next[j]];
        }
        let new = model.reward[i] + gamma * ev;
        change = change.max((new - q[sa]).abs());
        q[sa] = new;
    }
    change
}

fn collect(population: &[DyadParams], cfg: &QLearningConfig, seed: u64) -> Vec<Transition> {
    let root = SeedTree::new(seed).named("q-dataset");
    let mut pick = root.named("dyads").rng();
    let random = FixedProbPolicy::uniform(0.5);
    let mut out = Vec::with_capacity(cfg.n_trajectories * super::clock::HORIZON);
    for k in 0..cfg.n_trajectories {
        let dyad = &population[pick.random_range(0..population.len())];
        let node = root.child(k as u64);
        let mut prng = node.named("policy").rng();
        let mut sim = DyadSimulator::new(dyad, node.named("env").rng());
        while let Some(c) = sim.clock() {
            let features = Features::of(sim.state());
            let a = random.decide(c, sim.state(), &mut prng);
            let o = sim.step(&a).expect("gated actions match the clock");
            out.push(Transition {
                kind: c.kind(),
                features,
                action: code(&a),
                reward: f64::from(u8::from(o.adherence)),
                terminal: sim.clock().is_none(),
            });
        }
    }
    out
}

/// Fits the approximate optimal policy for a population.
pub fn approx_optimal_policy(population: &[DyadParams], cfg: &QLearningConfig, seed: u64) -> Result<TabularPolicy> {
    cfg.validate()?;
    if population.is_empty() || cfg.n_trajectories == 0 {
        return Err(Error::EmptyDataset("no random-policy trajectories to learn from".into()));
    }
    let trans = collect(population, cfg, seed);
    let rows: Vec<[f64; 3]> = trans.iter().map(|t| [t.features.distress, t.features.b_aya, t.features.b_care]).collect();
    let disc = Discretizer::fit(&rows, cfg.bins);
    let states: Vec<usize> = trans.iter().map(|t| disc.state_index(t.kind, &t.features)).collect();
    let model = empirical_model(&states, &trans);

    let n_states = disc.n_states();
    let mut q = vec![0.0; n_states * N_ACTIONS];
    let mut v = vec![0.0; n_states];
    let mut sweeps = 0;
    let mut change = f64::INFINITY;
    while sweeps < cfg.max_sweeps && change >= cfg.tolerance {
        change = sweep(&model, &mut q, &mut v, cfg.bins, cfg.discount);
        sweeps += 1;
    }
    log::debug!("q-learning: {} transitions, {} sweeps, final change {change:.3e}", trans.len(), sweeps);
    Ok(TabularPolicy { discretizer: disc, q, sweeps, final_change: change, n_transitions: trans.len() })
}

/// Largest Q change one more sweep would make (used to check the fixed point).
pub fn residual_sweep_change(population: &[DyadParams], cfg: &QLearningConfig, seed: u64, policy: &TabularPolicy) -> f64 {
    let trans = collect(population, cfg, seed);
    let states: Vec<usize> = trans.iter().map(|t| policy.discretizer.state_index(t.kind, &t.features)).collect();
    let model = empirical_model(&states, &trans);
    let mut q = policy.q.clone();
    let mut v = vec![0.0; policy.discretizer.n_states()];
    sweep(&model, &mut q, &mut v, cfg.bins, cfg.discount)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::population::{generate_population, impute_population, PopulationConfig};
    use crate::env::rollout::{evaluate_paired, NoIntervention};

    fn small_cfg() -> QLearningConfig {
        QLearningConfig { n_trajectories: 150, ..Default::default() }
    }

    #[test]
    fn bins_clamp_and_cover() {
        let d = Discretizer { lo: [0.0; 3], hi: [10.0; 3], bins: 10 };
        assert_eq!(d.bin(0, -3.0), 0);
        assert_eq!(d.bin(0, 0.0), 0);
        assert_eq!(d.bin(0, 9.99), 9);
        assert_eq!(d.bin(0, 10.0), 9);
        assert_eq!(d.bin(0, 55.0), 9);
        assert_eq!(d.n_states(), 12_000);
    }

    #[test]
    fn state_index_is_a_bijection() {
        let d = Discretizer { lo: [0.0; 3], hi: [3.0; 3], bins: 3 };
        let mut seen = std::collections::HashSet::new();
        for kind in [DecisionKind::WeekStart, DecisionKind::DayStart, DecisionKind::Evening] {
            for adh in [false, true] {
                for rel in [false, true] {
                    for x in 0..3 {
                        for y in 0..3 {
                            for z in 0..3 {
                                let f = Features {
                                    adherence: adh,
                                    distress: x as f64 + 0.5,
                                    b_aya: y as f64 + 0.5,
                                    b_care: z as f64 + 0.5,
                                    relationship: rel,
                                };
                                let s = d.state_index(kind, &f);
                                assert_eq!(kind_of_state(s, 3), kind);
                                assert!(seen.insert(s));
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(seen.len(), d.n_states());
    }

    #[test]
    fn empty_population_is_an_error() {
        assert!(matches!(approx_optimal_policy(&[], &small_cfg(), 0), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn fixed_point_after_convergence() {
        let pop = generate_population(2, 10, &PopulationConfig::default()).unwrap();
        let pop = impute_population(&pop, 1.0, 2).unwrap();
        let cfg = QLearningConfig { max_sweeps: 2000, ..small_cfg() };
        let pol = approx_optimal_policy(&pop, &cfg, 5).unwrap();
        assert!(pol.final_change < cfg.tolerance, "{}", pol.final_change);
        assert!(residual_sweep_change(&pop, &cfg, 5, &pol) <= cfg.tolerance);
    }

    #[test]
    fn sweep_cap_leaves_a_contracting_residual() {
        let pop = generate_population(2, 10, &PopulationConfig::default()).unwrap();
        let pop = impute_population(&pop, 1.0, 2).unwrap();
        let cfg = small_cfg();
        let pol = approx_optimal_policy(&pop, &cfg, 5).unwrap();
        assert!(pol.sweeps <= cfg.max_sweeps);
        let r = residual_sweep_change(&pop, &cfg, 5, &pol);
        assert!(r <= cfg.discount * pol.final_change + 1e-12);
    }

    #[test]
    fn no_effect_environment_policy_matches_baseline() {
        let pop = generate_population(4, 8, &PopulationConfig::default()).unwrap();
        let pop = impute_population(&pop, 0.0, 4).unwrap();
        let pol = approx_optimal_policy(&pop, &small_cfg(), 1).unwrap();
        let t = evaluate_paired(&pop, &[&pol, &NoIntervention, &FixedProbPolicy::uniform(0.5)], 30, 9);
        assert_eq!(t[0], t[1]);
        assert_eq!(t[1], t[2]);
    }
}
