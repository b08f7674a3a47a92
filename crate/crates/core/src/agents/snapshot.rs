//! Versioned JSON snapshots of learner state for inspection and regression tests.

use serde::{Deserialize, Serialize};

use super::multi::MultiAgentPolicy;
use super::single::SingleAgentPolicy;
use crate::error::{Error, Result};
use crate::rl::{AgentState, FeatureMap};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub name: String,
    pub dim: usize,
    pub gamma: f64,
    pub theta: Vec<f64>,
    pub perturb_w: Vec<f64>,
    pub n_transitions: usize,
}

impl AgentSnapshot {
    fn of<F: FeatureMap>(name: &str, a: &AgentState<F>) -> Self {
        AgentSnapshot {
            name: name.into(),
            dim: a.dim(),
            gamma: a.gamma,
            theta: a.theta.iter().copied().collect(),
            perturb_w: a.perturb_w.iter().copied().collect(),
            n_transitions: a.dataset.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSnapshot {
    pub beta_rel: Vec<f64>,
    pub beta_care: Vec<f64>,
    pub n_rel: usize,
    pub n_care: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySnapshot {
    pub format_version: u32,
    pub policy: String,
    pub agents: Vec<AgentSnapshot>,
    pub surrogate: Option<SurrogateSnapshot>,
}

impl PolicySnapshot {
    pub fn single(p: &SingleAgentPolicy) -> Self {
        PolicySnapshot {
            format_version: SNAPSHOT_VERSION,
            policy: "single_agent".into(),
            agents: vec![AgentSnapshot::of("single", &p.agent)],
            surrogate: None,
        }
    }

    pub fn multi(p: &MultiAgentPolicy) -> Self {
        PolicySnapshot {
            format_version: SNAPSHOT_VERSION,
            policy: if p.use_surrogate { "multi_agent_surrogate" } else { "multi_agent" }.into(),
            agents: vec![AgentSnapshot::of("aya", &p.aya), AgentSnapshot::of("care", &p.care), AgentSnapshot::of("rel", &p.rel)],
            surrogate: Some(SurrogateSnapshot {
                beta_rel: p.surrogate.rel.beta.iter().copied().collect(),
                beta_care: p.surrogate.care.beta.iter().copied().collect(),
                n_rel: p.surrogate.rel.len(),
                n_care: p.surrogate.care.len(),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot fields are always serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let snap: PolicySnapshot = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if snap.format_version != SNAPSHOT_VERSION {
            return Err(Error::Parse(format!("unsupported snapshot version {}", snap.format_version)));
        }
        Ok(snap)
    }
}
