//! Three independent learners, one per intervention component, acting on
//! their own timescales.

use rand::Rng;

use super::controller::Controller;
use super::state::{aya_state, care_state, rel_state, CurrentActions, AYA_STATE_DIM, CARE_STATE_DIM, REL_STATE_DIM, SLOTS_PER_WEEK};
use super::surrogate::SurrogateRewardModel;
use crate::env::clock::{ClockIndex, DAYS_TOTAL, HORIZON, WEEKS};
use crate::env::sim::{DyadState, Observations};
use crate::env::ActionBundle;
use crate::error::{config, Result};
use crate::rl::{greedy_full, AgentState, InteractionFeatures, RlsviConfig, Transition};
use crate::seed::SimRng;

pub const AYA_GAMMA: f64 = 0.5;
pub const CARE_GAMMA: f64 = 0.5;
pub const REL_GAMMA: f64 = 0.0;
pub const AYA_FEATURES: InteractionFeatures = InteractionFeatures::new(AYA_STATE_DIM, 1);
pub const CARE_FEATURES: InteractionFeatures = InteractionFeatures::new(CARE_STATE_DIM, 1);
pub const REL_FEATURES: InteractionFeatures = InteractionFeatures::new(REL_STATE_DIM, 1);

/// How one component's action is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentMode {
    Learn,
    /// Bernoulli with this probability; the component's learner is left untouched.
    Fixed(f64),
}

/// Counts of decisions and interventions per component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterventionCounts {
    pub decisions: [u64; 3],
    pub sent: [u64; 3],
}

impl InterventionCounts {
    pub fn rate(&self, component: usize) -> f64 {
        self.sent[component] as f64 / self.decisions[component] as f64
    }

    fn add(&mut self, component: usize, a: bool) {
        self.decisions[component] += 1;
        self.sent[component] += u64::from(a);
    }
}

#[derive(Debug, Clone)]
struct Pending {
    state: Vec<f64>,
    action: bool,
    /// Slot, day or week index of the decision.
    at: usize,
}

#[derive(Debug, Clone)]
pub struct MultiAgentPolicy {
    pub aya: AgentState,
    pub care: AgentState,
    pub rel: AgentState,
    pub use_surrogate: bool,
    pub surrogate: SurrogateRewardModel,
    /// Modes of the (AYA, carepartner, relationship) components.
    pub modes: [ComponentMode; 3],
    pub counts: InterventionCounts,
    pending: [Option<Pending>; 3],
    current: CurrentActions,
    weeks_closed: usize,
}

const AYA: usize = 0;
const CARE: usize = 1;
const REL: usize = 2;

impl MultiAgentPolicy {
    pub fn new(use_surrogate: bool, config: RlsviConfig) -> Result<Self> {
        Ok(MultiAgentPolicy {
            aya: AgentState::new(AYA_FEATURES, AYA_GAMMA, config)?,
            care: AgentState::new(CARE_FEATURES, CARE_GAMMA, config)?,
            rel: AgentState::new(REL_FEATURES, REL_GAMMA, config)?,
            use_surrogate,
            surrogate: SurrogateRewardModel::new(config),
            modes: [ComponentMode::Learn; 3],
            counts: InterventionCounts::default(),
            pending: [None, None, None],
            current: CurrentActions::default(),
            weeks_closed: 0,
        })
    }

    pub fn with_modes(mut self, modes: [ComponentMode; 3]) -> Result<Self> {
        for m in modes {
            if let ComponentMode::Fixed(p) = m {
                if !(0.0..=1.0).contains(&p) {
                    return Err(config(format!("fixed probability {p} outside [0, 1]")));
                }
            }
        }
        self.modes = modes;
        Ok(self)
    }

    fn agent(&mut self, c: usize) -> &mut AgentState {
        match c {
            AYA => &mut self.aya,
            CARE => &mut self.care,
            _ => &mut self.rel,
        }
    }

    /// Reward of the game decision of week `w`.
    pub fn rel_reward(&self, obs: &Observations, w: usize) -> f64 {
        if self.use_surrogate {
            self.surrogate.rel_reward(obs, w)
        } else {
            let s: u32 = obs.adherence[w * SLOTS_PER_WEEK..(w + 1) * SLOTS_PER_WEEK].iter().map(|&r| u32::from(r)).sum();
            f64::from(s) / SLOTS_PER_WEEK as f64
        }
    }

    /// Reward of the carepartner decision of day `d`.
    pub fn care_reward(&self, obs: &Observations, d: usize) -> f64 {
        if self.use_surrogate {
            self.surrogate.care_reward(obs, d)
        } else {
            f64::from(obs.adherence[2 * d] + obs.adherence[2 * d + 1]) / 2.0
        }
    }

    fn finish(&mut self, c: usize, reward: impl FnOnce(&Self, usize) -> f64, next: &[f64]) -> Result<()> {
        if let Some(p) = self.pending[c].take() {
            let r = reward(self, p.at);
            let t = Transition { state: p.state, action: u8::from(p.action), reward: r, next_state: next.to_vec() };
            self.agent(c).record(&t)?;
        }
        Ok(())
    }

    /// Adds every completed week's surrogate rows not yet seen.
    fn close_weeks(&mut self, obs: &Observations) -> Result<()> {
        while self.weeks_closed < obs.relationship.len() {
            self.surrogate.close_week(obs, self.weeks_closed)?;
            self.weeks_closed += 1;
        }
        Ok(())
    }

    fn act(&mut self, c: usize, state: &[f64], at: usize, rng: &mut SimRng) -> Result<bool> {
        let a = match self.modes[c] {
            ComponentMode::Learn => {
                let agent = self.agent(c);
                agent.rlsvi_step(rng)?;
                let a = greedy_full(&agent.features, agent.theta.as_slice(), state) & 1 != 0;
                self.pending[c] = Some(Pending { state: state.to_vec(), action: a, at });
                a
            }
            ComponentMode::Fixed(p) => rng.random::<f64>() < p,
        };
        self.counts.add(c, a);
        Ok(a)
    }
}

impl Controller for MultiAgentPolicy {
    fn decide(&mut self, clock: ClockIndex, _: &DyadState, obs: &Observations, rng: &mut SimRng) -> Result<ActionBundle> {
        let i = clock.index();
        let d = clock.day_index();
        let w = usize::from(clock.week()) - 1;
        self.close_weeks(obs)?;

        let mut a_rel = None;
        if clock.is_week_start() {
            let s = rel_state(obs, w);
            self.finish(REL, |me, at| me.rel_reward(obs, at), &s)?;
            let a = self.act(REL, &s, w, rng)?;
            self.current.a_rel = f64::from(u8::from(a));
            a_rel = Some(a);
        }
        let mut a_care = None;
        if clock.is_day_start() {
            let s = care_state(obs, d, self.current);
            self.finish(CARE, |me, at| me.care_reward(obs, at), &s)?;
            let a = self.act(CARE, &s, d, rng)?;
            self.current.a_care = f64::from(u8::from(a));
            a_care = Some(a);
        }
        let s = aya_state(obs, i, self.current);
        self.finish(AYA, |_, at| f64::from(obs.adherence[at]), &s)?;
        let a_aya = self.act(AYA, &s, i, rng)?;
        Ok(ActionBundle { a_aya, a_care, a_rel })
    }

    fn end_dyad(&mut self, obs: &Observations, _: &mut SimRng) -> Result<()> {
        self.close_weeks(obs)?;
        self.finish(REL, |me, at| me.rel_reward(obs, at), &rel_state(obs, WEEKS as usize))?;
        self.finish(CARE, |me, at| me.care_reward(obs, at), &care_state(obs, DAYS_TOTAL, self.current))?;
        self.finish(AYA, |_, at| f64::from(obs.adherence[at]), &aya_state(obs, HORIZON, self.current))?;
        self.current = CurrentActions::default();
        self.weeks_closed = 0;
        Ok(())
    }
}
