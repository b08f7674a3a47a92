//! Engineered rewards for the relationship and carepartner agents, with
//! coefficients learned by Bayesian ridge regression around fixed prior means.

use nalgebra::{DMatrix, DVector};

use super::state::SLOTS_PER_WEEK;
use crate::env::clock::{DAYS as DAYS_PER_WEEK, WEEKS};
use crate::env::sim::Observations;
use crate::error::Result;
use crate::rl::{FactoredPosterior, RlsviConfig};

pub const REL_PRIOR: [f64; 5] = [1.0, 1.0, -1.0, -1.0, 0.5];
pub const CARE_PRIOR: [f64; 5] = [1.0, -1.0, -1.0, 1.0, -0.5];

/// Relationship covariates `(1, Y_prev, B_aya, A, A * Y_prev)`.
pub fn rel_covariates(y_prev: f64, b_aya: f64, a: f64) -> [f64; 5] {
    [1.0, y_prev, b_aya, a, a * y_prev]
}

/// Carepartner covariates `(1, Y_care, B_care next day, Y_rel prev week, A_care)`.
pub fn care_covariates(distress: f64, b_care_next: f64, y_rel_prev: f64, a: f64) -> [f64; 5] {
    [1.0, distress, b_care_next, y_rel_prev, a]
}

fn dot5(x: &[f64; 5], b: &DVector<f64>) -> f64 {
    x.iter().zip(b.iter()).map(|(x, b)| x * b).sum()
}

/// Realized term plus one-step greedy lookahead over next week's game decision.
pub fn rel_reward(current: &[f64; 5], next: Option<(f64, f64)>, beta: &DVector<f64>) -> f64 {
    let realized = dot5(current, beta);
    match next {
        Some((y, b)) => {
            let v0 = dot5(&rel_covariates(y, b, 0.0), beta);
            let v1 = dot5(&rel_covariates(y, b, 1.0), beta);
            realized + v0.max(v1)
        }
        None => realized,
    }
}

pub fn care_reward(x: &[f64; 5], beta: &DVector<f64>) -> f64 {
    dot5(x, beta)
}

/// Running Bayesian ridge fit of one surrogate regression.
#[derive(Debug, Clone)]
pub struct SurrogateRegression {
    pub prior: DVector<f64>,
    pub beta: DVector<f64>,
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    n: usize,
    config: RlsviConfig,
}

impl SurrogateRegression {
    pub fn new(prior: [f64; 5], config: RlsviConfig) -> Self {
        let prior = DVector::from_row_slice(&prior);
        SurrogateRegression { beta: prior.clone(), prior, gram: DMatrix::zeros(5, 5), xty: DVector::zeros(5), n: 0, config }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add(&mut self, x: &[f64; 5], y: f64) {
        for i in 0..5 {
            for j in 0..5 {
                self.gram[(i, j)] += x[i] * x[j];
            }
            self.xty[i] += x[i] * y;
        }
        self.n += 1;
    }

    /// Sets `beta` to the posterior mean of all rows added so far.
    pub fn refit(&mut self) -> Result<()> {
        let post = FactoredPosterior::from_stats(&self.gram, &self.xty, self.config.lambda, self.config.sigma, &self.prior)?;
        self.beta = post.mean;
        Ok(())
    }
}

/// Both surrogate regressions of the multi-agent policy.
#[derive(Debug, Clone)]
pub struct SurrogateRewardModel {
    pub rel: SurrogateRegression,
    pub care: SurrogateRegression,
}

impl SurrogateRewardModel {
    pub fn new(config: RlsviConfig) -> Self {
        SurrogateRewardModel { rel: SurrogateRegression::new(REL_PRIOR, config), care: SurrogateRegression::new(CARE_PRIOR, config) }
    }

    /// Relationship covariates of week `w` (0-based) from the log.
    pub fn rel_x(obs: &Observations, w: usize) -> [f64; 5] {
        rel_covariates(obs.prev_relationship(w), obs.burden_aya[w * SLOTS_PER_WEEK], f64::from(obs.a_rel[w]))
    }

    /// Carepartner covariates of day `d` (0-based) from the log.
    pub fn care_x(obs: &Observations, d: usize) -> [f64; 5] {
        let w = d / DAYS_PER_WEEK as usize;
        care_covariates(obs.distress[d], obs.burden_care[d + 1], obs.prev_relationship(w), f64::from(obs.a_care[d]))
    }

    /// Adds week `w`'s regression rows (one relationship row targeting the
    /// week's adherence sum, one carepartner row per day targeting the week's
    /// relationship quality) and refits both coefficient vectors.
    pub fn close_week(&mut self, obs: &Observations, w: usize) -> Result<()> {
        let adherence: f64 = obs.adherence[w * SLOTS_PER_WEEK..(w + 1) * SLOTS_PER_WEEK].iter().map(|&r| f64::from(r)).sum();
        self.rel.add(&Self::rel_x(obs, w), adherence);
        let y_rel = f64::from(obs.relationship[w]);
        for d in w * DAYS_PER_WEEK as usize..(w + 1) * DAYS_PER_WEEK as usize {
            self.care.add(&Self::care_x(obs, d), y_rel);
        }
        self.rel.refit()?;
        self.care.refit()
    }

    /// Surrogate reward of week `w`; the lookahead is dropped in the final week.
    pub fn rel_reward(&self, obs: &Observations, w: usize) -> f64 {
        let next = (w + 1 < WEEKS as usize).then(|| (f64::from(obs.relationship[w]), obs.burden_aya[(w + 1) * SLOTS_PER_WEEK]));
        rel_reward(&Self::rel_x(obs, w), next, &self.rel.beta)
    }

    pub fn care_reward(&self, obs: &Observations, d: usize) -> f64 {
        care_reward(&Self::care_x(obs, d), &self.care.beta)
    }
}
