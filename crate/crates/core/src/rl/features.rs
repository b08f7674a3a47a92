//! Linear feature maps over (state, binary action) pairs.

use crate::error::{contract, Result};

/// Binary action vector packed into bits: bit `j` is component `j`.
pub type ActionCode = u8;

#[inline]
pub fn action_bit(a: ActionCode, j: usize) -> f64 {
    f64::from((a >> j) & 1)
}

/// Deterministic map `(state, action) -> R^dim`.
pub trait FeatureMap {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn dim(&self) -> usize;

    /// Writes `phi(s, a)` into `out` (length `dim`).
    fn evaluate_into(&self, s: &[f64], a: ActionCode, out: &mut [f64]);

    fn evaluate(&self, s: &[f64], a: ActionCode) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.evaluate_into(s, a, &mut out);
        out
    }

    /// `max_a <phi(s, a), theta>` over all of `{0,1}^action_dim`.
    fn max_value(&self, s: &[f64], theta: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.dim()];
        (0..1u16 << self.action_dim())
            .map(|a| {
                self.evaluate_into(s, a as ActionCode, &mut buf);
                dot(&buf, theta)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// [`FeatureMap::max_value`] for every state of the row-major batch `states`.
    fn max_values(&self, states: &[f64], theta: &[f64], out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(states.chunks_exact(self.state_dim())) {
            *o = self.max_value(s, theta);
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `phi(s, a) = (1, s, a_1..a_m, s*a_1, .., s*a_m)` of length `1 + k + m + k m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractionFeatures {
    pub state_dim: usize,
    pub action_dim: usize,
}

impl InteractionFeatures {
    pub const fn new(state_dim: usize, action_dim: usize) -> Self {
        InteractionFeatures { state_dim, action_dim }
    }

    /// Value of turning on component `j` alone: `theta_{a_j} + <theta_{s a_j}, s>`.
    #[inline]
    fn gain(&self, s: &[f64], theta: &[f64], j: usize) -> f64 {
        let k = self.state_dim;
        let off = 1 + k + self.action_dim + j * k;
        theta[1 + k + j] + dot(&theta[off..off + k], s)
    }

    #[inline]
    fn base(&self, s: &[f64], theta: &[f64]) -> f64 {
        theta[0] + dot(&theta[1..1 + self.state_dim], s)
    }
}

impl FeatureMap for InteractionFeatures {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn action_dim(&self) -> usize {
        self.action_dim
    }

    fn dim(&self) -> usize {
        1 + self.state_dim + self.action_dim * (1 + self.state_dim)
    }

    fn evaluate_into(&self, s: &[f64], a: ActionCode, out: &mut [f64]) {
        let k = self.state_dim;
        debug_assert_eq!(s.len(), k);
        out[0] = 1.0;
        out[1..1 + k].copy_from_slice(s);
        for j in 0..self.action_dim {
            let aj = action_bit(a, j);
            out[1 + k + j] = aj;
            let off = 1 + k + self.action_dim + j * k;
            for (o, x) in out[off..off + k].iter_mut().zip(s) {
                *o = aj * x;
            }
        }
    }

    // The value is separable across components, so the max is taken per component.
    fn max_value(&self, s: &[f64], theta: &[f64]) -> f64 {
        let mut v = self.base(s, theta);
        for j in 0..self.action_dim {
            v += self.gain(s, theta, j).max(0.0);
        }
        v
    }

    fn max_values(&self, states: &[f64], theta: &[f64], out: &mut [f64]) {
        let (k, m) = (self.state_dim, self.action_dim);
        if k == 0 {
            return out.iter_mut().for_each(|o| *o = self.max_value(&[], theta));
        }
        let base = &theta[1..1 + k];
        let gains = &theta[1 + k + m..];
        for (o, s) in out.iter_mut().zip(states.chunks_exact(k)) {
            let mut v = theta[0] + dot(base, s);
            for (j, w) in gains.chunks_exact(k).enumerate() {
                v += (theta[1 + k + j] + dot(w, s)).max(0.0);
            }
            *o = v;
        }
    }
}

/// Components ordered so that component 0 is the most significant in the
/// lexicographic comparison of action vectors.
fn lex_key(a: ActionCode, m: usize) -> u32 {
    (0..m).fold(0u32, |acc, j| (acc << 1) | u32::from((a >> j) & 1))
}

/// `argmax_a <phi(s, a), theta>` over `actions`, ties going to the
/// lexicographically smallest action vector.
pub fn greedy_action<F: FeatureMap + ?Sized>(features: &F, theta: &[f64], state: &[f64], actions: &[ActionCode]) -> Result<ActionCode> {
    if actions.is_empty() {
        return Err(contract("greedy_action needs a non-empty action set"));
    }
    let m = features.action_dim();
    let mut sorted = actions.to_vec();
    sorted.sort_by_key(|&a| lex_key(a, m));
    let mut buf = vec![0.0; features.dim()];
    let mut best = sorted[0];
    let mut best_v = f64::NEG_INFINITY;
    for a in sorted {
        features.evaluate_into(state, a, &mut buf);
        let v = dot(&buf, theta);
        if v > best_v {
            best_v = v;
            best = a;
        }
    }
    Ok(best)
}

/// Greedy action over the full product space `{0,1}^m`, computed per component.
pub fn greedy_full(features: &InteractionFeatures, theta: &[f64], state: &[f64]) -> ActionCode {
    let mut a = 0;
    for j in 0..features.action_dim {
        if features.gain(state, theta, j) > 0.0 {
            a |= 1 << j;
        }
    }
    a
}

/// Every action code of `{0,1}^m`.
pub fn all_actions(m: usize) -> Vec<ActionCode> {
    (0..1u16 << m).map(|a| a as ActionCode).collect()
}
