//! Infinite-horizon randomized least-squares value iteration.

use nalgebra::{DMatrix, DMatrixView, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::features::{ActionCode, FeatureMap, InteractionFeatures};
use super::ridge::FactoredPosterior;
use crate::error::{contract, Result};
use crate::seed::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RlsviConfig {
    /// Prior precision.
    pub lambda: f64,
    /// Noise scale.
    pub sigma: f64,
}

impl Default for RlsviConfig {
    fn default() -> Self {
        RlsviConfig { lambda: 0.75, sigma: 0.5 }
    }
}

/// One stored transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: ActionCode,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Transitions with cached feature rows and sufficient statistics.
#[derive(Debug, Clone)]
pub struct Dataset {
    dim: usize,
    state_dim: usize,
    /// Feature rows, row-major `n x dim`.
    rows: Vec<f64>,
    /// Next states, row-major `n x state_dim`.
    next: Vec<f64>,
    rewards: Vec<f64>,
    actions: Vec<ActionCode>,
    states: Vec<f64>,
    gram: DMatrix<f64>,
    xtr: DVector<f64>,
}

impl Dataset {
    pub fn new<F: FeatureMap>(features: &F) -> Self {
        let d = features.dim();
        Dataset {
            dim: d,
            state_dim: features.state_dim(),
            rows: Vec::new(),
            next: Vec::new(),
            rewards: Vec::new(),
            actions: Vec::new(),
            states: Vec::new(),
            gram: DMatrix::zeros(d, d),
            xtr: DVector::zeros(d),
        }
    }

    pub fn from_transitions<F: FeatureMap>(features: &F, ts: &[Transition]) -> Result<Self> {
        let mut d = Self::new(features);
        for t in ts {
            d.push(features, t)?;
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn push<F: FeatureMap>(&mut self, features: &F, t: &Transition) -> Result<()> {
        if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim {
            return Err(contract(format!("transition state length must be {}", self.state_dim)));
        }
        if t.state.iter().chain(&t.next_state).any(|x| !x.is_finite()) || !t.reward.is_finite() {
            return Err(contract(format!("non-finite transition: {t:?}")));
        }
        let start = self.rows.len();
        self.rows.resize(start + self.dim, 0.0);
        features.evaluate_into(&t.state, t.action, &mut self.rows[start..]);
        let row = &self.rows[start..];
        for i in 0..self.dim {
            if row[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                self.gram[(i, j)] += row[i] * row[j];
            }
            self.xtr[i] += row[i] * t.reward;
        }
        self.next.extend_from_slice(&t.next_state);
        self.states.extend_from_slice(&t.state);
        self.rewards.push(t.reward);
        self.actions.push(t.action);
        Ok(())
    }

    pub fn transition(&self, i: usize) -> Transition {
        let k = self.state_dim;
        Transition {
            state: self.states[i * k..(i + 1) * k].to_vec(),
            action: self.actions[i],
            reward: self.rewards[i],
            next_state: self.next[i * k..(i + 1) * k].to_vec(),
        }
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// `X^T y` with `y_i = r_i + gamma max_a <phi(s'_i, a), theta>`.
    fn target_moment<F: FeatureMap>(&self, features: &F, gamma: f64, theta: &[f64]) -> DVector<f64> {
        let mut b = self.xtr.clone();
        if gamma == 0.0 {
            return b;
        }
        let mut m = DVector::zeros(self.len());
        features.max_values(&self.next, theta, m.as_mut_slice());
        let x = DMatrixView::from_slice(&self.rows, self.dim, self.len());
        b.gemv(gamma, &x, &m, 1.0);
        b
    }
}

/// One Inf-RLSVI learner.
#[derive(Debug, Clone)]
pub struct AgentState<F: FeatureMap = InteractionFeatures> {
    pub features: F,
    pub theta: DVector<f64>,
    pub perturb_w: DVector<f64>,
    pub gamma: f64,
    pub config: RlsviConfig,
    pub dataset: Dataset,
}

impl<F: FeatureMap> AgentState<F> {
    pub fn new(features: F, gamma: f64, config: RlsviConfig) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(contract(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        if !(config.lambda > 0.0 && config.sigma > 0.0) {
            return Err(contract("lambda and sigma must be positive"));
        }
        let d = features.dim();
        let dataset = Dataset::new(&features);
        Ok(AgentState { features, theta: DVector::zeros(d), perturb_w: DVector::zeros(d), gamma, config, dataset })
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    pub fn record(&mut self, t: &Transition) -> Result<()> {
        self.dataset.push(&self.features, t)
    }

    /// Posterior of the regression with targets built from the stored `theta`.
    pub fn posterior(&self) -> Result<FactoredPosterior> {
        let b = self.dataset.target_moment(&self.features, self.gamma, self.theta.as_slice());
        let prior = DVector::zeros(self.dim());
        FactoredPosterior::from_stats(&self.dataset.gram, &b, self.config.lambda, self.config.sigma, &prior)
    }

    /// Refits the value function and resamples `theta = mean + w'`, with
    /// `w' = gamma w + sqrt(1 - gamma^2) L^-T z`.
    pub fn rlsvi_step(&mut self, rng: &mut SimRng) -> Result<()> {
        let post = self.posterior()?;
        let z = DVector::from_iterator(self.dim(), (0..self.dim()).map(|_| StandardNormal.sample(rng)));
        let noise = post.scale_noise(&z);
        let g = self.gamma;
        self.perturb_w = &self.perturb_w * g + noise * (1.0 - g * g).sqrt();
        self.theta = post.mean + &self.perturb_w;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::ridge::ridge_posterior;
    use rand::{Rng, SeedableRng};

    fn random_transitions(n: usize, k: usize, m: usize, seed: u64) -> Vec<Transition> {
        let mut rng = SimRng::seed_from_u64(seed);
        (0..n)
            .map(|_| Transition {
                state: (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
                action: rng.random_range(0..1u8 << m),
                reward: rng.random(),
                next_state: (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
            })
            .collect()
    }

    #[test]
    fn gram_cache_matches_dense_solve() {
        let f = InteractionFeatures::new(4, 1);
        let ts = random_transitions(60, 4, 1, 1);
        let mut agent = AgentState::new(f, 0.5, RlsviConfig::default()).unwrap();
        for t in &ts {
            agent.record(t).unwrap();
        }
        agent.theta = DVector::from_fn(10, |i, _| 0.1 * i as f64 - 0.3);
        let x = DMatrix::from_fn(ts.len(), 10, |i, j| f.evaluate(&ts[i].state, ts[i].action)[j]);
        let y = DVector::from_fn(ts.len(), |i, _| ts[i].reward + 0.5 * f.max_value(&ts[i].next_state, agent.theta.as_slice()));
        let dense = ridge_posterior(&x, &y, 0.75, 0.5, &DVector::zeros(10)).unwrap();
        let fast = agent.posterior().unwrap();
        assert!((dense.mean - fast.mean).abs().max() < 1e-10);
    }

    #[test]
    fn empty_gamma_zero_is_prior_draw() {
        let mut agent = AgentState::new(InteractionFeatures::new(4, 1), 0.0, RlsviConfig::default()).unwrap();
        let mut rng = SimRng::seed_from_u64(3);
        let n = 4000;
        let mut sum = DVector::zeros(10);
        let mut sq = DVector::zeros(10);
        for _ in 0..n {
            agent.rlsvi_step(&mut rng).unwrap();
            sum += &agent.theta;
            sq += agent.theta.component_mul(&agent.theta);
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean.component_mul(&mean);
        let prior_var = 1.0 / 0.75;
        let se = (prior_var / n as f64).sqrt();
        assert!(mean.iter().all(|m| m.abs() < 4.0 * se));
        assert!(var.iter().all(|v| (v / prior_var - 1.0).abs() < 0.1));
    }

    #[test]
    fn gamma_zero_targets_are_rewards() {
        let f = InteractionFeatures::new(2, 1);
        let ts = random_transitions(10, 2, 1, 4);
        let mut agent = AgentState::new(f, 0.0, RlsviConfig::default()).unwrap();
        for t in &ts {
            agent.record(t).unwrap();
        }
        agent.theta = DVector::from_element(6, 5.0);
        let a = agent.posterior().unwrap().mean;
        agent.theta = DVector::zeros(6);
        let b = agent.posterior().unwrap().mean;
        assert_eq!(a, b);
    }

    #[test]
    fn storage_representation_does_not_matter() {
        let f = InteractionFeatures::new(9, 3);
        let ts = random_transitions(40, 9, 3, 8);
        let mut a = AgentState::new(f, 0.5, RlsviConfig::default()).unwrap();
        for t in &ts {
            a.record(t).unwrap();
        }
        let mut b = a.clone();
        b.dataset = Dataset::from_transitions(&f, &(0..ts.len()).map(|i| a.dataset.transition(i)).collect::<Vec<_>>()).unwrap();
        let mut ra = SimRng::seed_from_u64(1);
        let mut rb = SimRng::seed_from_u64(1);
        for _ in 0..3 {
            a.rlsvi_step(&mut ra).unwrap();
            b.rlsvi_step(&mut rb).unwrap();
        }
        assert_eq!(a.theta, b.theta);
    }

    #[test]
    fn rejects_bad_hyperparameters_and_states() {
        assert!(AgentState::new(InteractionFeatures::new(1, 1), 1.0, RlsviConfig::default()).is_err());
        assert!(AgentState::new(InteractionFeatures::new(1, 1), 0.5, RlsviConfig { lambda: 0.0, sigma: 1.0 }).is_err());
        let mut a = AgentState::new(InteractionFeatures::new(2, 1), 0.5, RlsviConfig::default()).unwrap();
        let t = Transition { state: vec![0.0], action: 0, reward: 0.0, next_state: vec![0.0, 0.0] };
        assert!(a.record(&t).is_err());
    }
}
