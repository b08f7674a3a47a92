//! The interface between a decision maker and the simulator, plus the
//! non-learning baselines.

use crate::env::clock::ClockIndex;
use crate::env::model::DyadParams;
use crate::env::rollout::{EnvPolicy, FixedProbPolicy};
use crate::env::sim::{DyadSimulator, DyadState, Observations};
use crate::env::ActionBundle;
use crate::error::Result;
use crate::seed::SimRng;

/// A decision maker that may learn across the dyads it is run on.
pub trait Controller {
    /// Chooses the actions for `clock` given everything observed so far.
    fn decide(&mut self, clock: ClockIndex, state: &DyadState, obs: &Observations, rng: &mut SimRng) -> Result<ActionBundle>;

    /// Called once after the final decision time of a dyad.
    fn end_dyad(&mut self, _obs: &Observations, _rng: &mut SimRng) -> Result<()> {
        Ok(())
    }
}

/// Runs one dyad through all decision times.
pub fn run_dyad<C: Controller + ?Sized>(controller: &mut C, params: &DyadParams, env_rng: SimRng, policy_rng: &mut SimRng) -> Result<Observations> {
    let mut sim = DyadSimulator::new(params, env_rng);
    while let Some(c) = sim.clock() {
        let a = controller.decide(c, sim.state(), sim.observations(), policy_rng)?;
        sim.step(&a)?;
    }
    let obs = sim.into_observations();
    controller.end_dyad(&obs, policy_rng)?;
    Ok(obs)
}

/// Adapts a fixed environment policy to the controller interface.
#[derive(Debug, Clone)]
pub struct Fixed<P: EnvPolicy>(pub P);

impl<P: EnvPolicy> Controller for Fixed<P> {
    fn decide(&mut self, clock: ClockIndex, state: &DyadState, _: &Observations, rng: &mut SimRng) -> Result<ActionBundle> {
        Ok(self.0.decide(clock, state, rng))
    }
}

pub fn uniform_random() -> Fixed<FixedProbPolicy> {
    Fixed(FixedProbPolicy::uniform(0.5))
}
