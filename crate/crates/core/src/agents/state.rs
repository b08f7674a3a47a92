//! Agent state vectors built from the observation log.
//!
//! Builders take a position rather than a clock so that the state just after
//! the final decision time (slot 196, day 98, week 14) can be formed when an
//! episode closes. Quantities not yet observed fall back to the initial values
//! recorded by the simulator.

use crate::env::clock::{DAYS as DAYS_PER_WEEK, SLOTS};
use crate::env::sim::Observations;

pub const SLOTS_PER_WEEK: usize = DAYS_PER_WEEK as usize * SLOTS as usize;

pub const AYA_STATE_DIM: usize = 4;
pub const CARE_STATE_DIM: usize = 4;
pub const REL_STATE_DIM: usize = 5;
pub const SINGLE_STATE_DIM: usize = 9;

/// Which learner a state vector is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    Aya,
    Care,
    Rel,
    Single,
}

impl AgentKind {
    pub fn state_dim(self) -> usize {
        match self {
            AgentKind::Aya => AYA_STATE_DIM,
            AgentKind::Care => CARE_STATE_DIM,
            AgentKind::Rel => REL_STATE_DIM,
            AgentKind::Single => SINGLE_STATE_DIM,
        }
    }
}

/// Actions already fixed for the current period: the week's game decision and
/// the day's carepartner decision (previous values where not yet chosen).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurrentActions {
    pub a_care: f64,
    pub a_rel: f64,
}

/// `(R_prev, B_aya, Y_rel of last week, A_rel of this week)` at slot `i`.
pub fn aya_state(obs: &Observations, i: usize, cur: CurrentActions) -> [f64; AYA_STATE_DIM] {
    let w = i / SLOTS_PER_WEEK;
    [obs.prev_adherence(i), obs.burden_aya[i], obs.prev_relationship(w), cur.a_rel]
}

/// `(Y_care of yesterday, B_care today, Y_rel of last week, A_rel of this week)` at day `d`.
pub fn care_state(obs: &Observations, d: usize, cur: CurrentActions) -> [f64; CARE_STATE_DIM] {
    let w = d / DAYS_PER_WEEK as usize;
    [obs.prev_distress(d), obs.burden_care[d], obs.prev_relationship(w), cur.a_rel]
}

/// `(Y_rel of last week, B_aya and B_care at the week's first decision, weighted
/// adherence and distress of last week)` at week `w`.
pub fn rel_state(obs: &Observations, w: usize) -> [f64; REL_STATE_DIM] {
    let (ya, yc) = obs.prev_mediators(w);
    [
        obs.prev_relationship(w),
        obs.burden_aya[w * SLOTS_PER_WEEK],
        obs.burden_care[w * DAYS_PER_WEEK as usize],
        ya,
        yc,
    ]
}

/// The nine observed quantities available to a single flat agent at slot `i`.
pub fn single_state(obs: &Observations, i: usize, cur: CurrentActions) -> [f64; SINGLE_STATE_DIM] {
    let d = i / SLOTS as usize;
    let w = i / SLOTS_PER_WEEK;
    let (ya, yc) = obs.prev_mediators(w);
    [
        obs.prev_distress(d),
        obs.prev_relationship(w),
        obs.prev_adherence(i),
        ya,
        yc,
        obs.burden_aya[i],
        obs.burden_care[d],
        cur.a_care,
        cur.a_rel,
    ]
}
