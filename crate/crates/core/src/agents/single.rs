//! One flat learner choosing all three components jointly.

use super::controller::Controller;
use super::state::{single_state, CurrentActions, SINGLE_STATE_DIM};
use crate::env::clock::{ClockIndex, HORIZON};
use crate::env::sim::{DyadState, Observations};
use crate::env::ActionBundle;
use crate::error::Result;
use crate::rl::{greedy_full, ActionCode, AgentState, InteractionFeatures, RlsviConfig, Transition};
use crate::seed::SimRng;

pub const SINGLE_GAMMA: f64 = 0.5;
pub const SINGLE_FEATURES: InteractionFeatures = InteractionFeatures::new(SINGLE_STATE_DIM, 3);

#[derive(Debug, Clone)]
pub struct SingleAgentPolicy {
    pub agent: AgentState,
    pending: Option<(Vec<f64>, ActionCode)>,
    /// Care and game actions in force (updated only when they take effect).
    current: CurrentActions,
}

impl SingleAgentPolicy {
    pub fn new(config: RlsviConfig) -> Result<Self> {
        Ok(SingleAgentPolicy { agent: AgentState::new(SINGLE_FEATURES, SINGLE_GAMMA, config)?, pending: None, current: CurrentActions::default() })
    }

    fn finish_pending(&mut self, reward: f64, next: &[f64]) -> Result<()> {
        if let Some((state, action)) = self.pending.take() {
            self.agent.record(&Transition { state, action, reward, next_state: next.to_vec() })?;
        }
        Ok(())
    }
}

impl Controller for SingleAgentPolicy {
    fn decide(&mut self, clock: ClockIndex, _: &DyadState, obs: &Observations, rng: &mut SimRng) -> Result<ActionBundle> {
        let i = clock.index();
        let s = single_state(obs, i, self.current);
        if i > 0 {
            self.finish_pending(f64::from(obs.adherence[i - 1]), &s)?;
        }
        self.agent.rlsvi_step(rng)?;
        let a = greedy_full(&self.agent.features, self.agent.theta.as_slice(), &s);
        self.pending = Some((s.to_vec(), a));
        let bundle = ActionBundle::gated(clock, a & 1 != 0, a & 2 != 0, a & 4 != 0);
        if let Some(c) = bundle.a_care {
            self.current.a_care = f64::from(u8::from(c));
        }
        if let Some(r) = bundle.a_rel {
            self.current.a_rel = f64::from(u8::from(r));
        }
        Ok(bundle)
    }

    fn end_dyad(&mut self, obs: &Observations, _: &mut SimRng) -> Result<()> {
        let s = single_state(obs, HORIZON, self.current);
        self.finish_pending(f64::from(obs.adherence[HORIZON - 1]), &s)?;
        self.current = CurrentActions::default();
        Ok(())
    }
}
