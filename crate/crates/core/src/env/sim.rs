//! Dyad simulator: orchestrates the transition models in decision-time order.
//!
//! Every step consumes the same random draws in the same order whatever the
//! actions are, so two action sequences run on the same stream are paired.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::ActionBundle;
use super::clock::{ClockIndex, DAYS_TOTAL, HORIZON, WEEKS};
use super::model::{
    adherence_prob, distress_next, relationship_prob, std_normal, week_mediators, AdherenceInputs, DistressInputs,
    DyadParams, RelationshipInputs, Role,
};
use crate::error::{contract, Result};
use crate::seed::SimRng;

/// Slots of no-intervention dynamics simulated before the trial starts.
pub const BURN_IN_SLOTS: usize = 500;

/// Complete dynamic state of one dyad between decision times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadState {
    pub raw_burden_aya: f64,
    pub raw_burden_care: f64,
    /// Standardized AYA burden at the next decision time.
    pub b_aya: f64,
    /// Standardized carepartner burden for the current (or next) day.
    pub b_care: f64,
    pub last_adherence: bool,
    /// Distress of the previous completed day.
    pub last_distress: f64,
    /// Distress of the current day; observed at day end.
    pub today_distress: f64,
    pub rel_quality_prev_week: bool,
    pub rel_action_this_week: bool,
    pub care_action_today: bool,
    pub week_adherence_hist: Vec<u8>,
    pub week_distress_hist: Vec<f64>,
}

/// Values observed before the first decision time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialObservation {
    pub adherence: bool,
    pub distress: f64,
    pub relationship: bool,
    /// Weighted mediator sums of the last burn-in week.
    pub rbar_aya: f64,
    pub rbar_care: f64,
}

impl DyadState {
    /// Draws the pre-trial state: relationship quality ~ Bernoulli(0.5), burdens
    /// at their calibration mean and adherence/distress after a burn-in under no
    /// intervention.
    pub fn initial<R: Rng + ?Sized>(params: &DyadParams, rng: &mut R) -> (Self, InitialObservation) {
        let rel = rng.random::<f64>() < 0.5;
        let scaling = &params.burden_scaling;
        let mut s = DyadState {
            raw_burden_aya: scaling.mean(Role::Aya),
            raw_burden_care: scaling.mean(Role::Care),
            b_aya: 0.0,
            b_care: 0.0,
            last_adherence: false,
            last_distress: 0.0,
            today_distress: 0.0,
            rel_quality_prev_week: rel,
            rel_action_this_week: false,
            care_action_today: false,
            week_adherence_hist: Vec::with_capacity(14),
            week_distress_hist: Vec::with_capacity(7),
        };
        let mut adh_hist = std::collections::VecDeque::with_capacity(15);
        let mut dis_hist = std::collections::VecDeque::with_capacity(8);
        for i in 0..BURN_IN_SLOTS {
            let window = (i % 2) as u8;
            if window == 0 {
                let x = DistressInputs {
                    last_distress: s.last_distress,
                    last_adherence: s.last_adherence,
                    rel_prev: rel,
                    b_care: 0.0,
                };
                s.today_distress = distress_next(&params.distress, &x, false, std_normal(rng));
            }
            let x = AdherenceInputs {
                last_adherence: s.last_adherence,
                rel_prev: rel,
                last_distress: s.last_distress,
                b_aya: 0.0,
            };
            let p = adherence_prob(params.adherence(window), &x, false, params.mediator_multiplier);
            s.last_adherence = rng.random::<f64>() < p;
            push_bounded(&mut adh_hist, u8::from(s.last_adherence), 14);
            if window == 1 {
                s.last_distress = s.today_distress;
                push_bounded(&mut dis_hist, s.last_distress, 7);
            }
        }
        let adh: Vec<u8> = adh_hist.into_iter().collect();
        let dis: Vec<f64> = dis_hist.into_iter().collect();
        let (rbar_aya, rbar_care) = week_mediators(&adh, &dis, params.mediator_discount);
        let obs = InitialObservation {
            adherence: s.last_adherence,
            distress: s.last_distress,
            relationship: rel,
            rbar_aya,
            rbar_care,
        };
        (s, obs)
    }
}

fn push_bounded<T>(q: &mut std::collections::VecDeque<T>, v: T, cap: usize) {
    if q.len() == cap {
        q.pop_front();
    }
    q.push_back(v);
}

/// Observations emitted by one step, following the measurement schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepObservation {
    pub adherence: bool,
    /// Present at day end.
    pub distress: Option<f64>,
    /// Present at week end, with the week's weighted mediator sums.
    pub relationship: Option<WeekClose>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeekClose {
    pub quality: bool,
    pub rbar_aya: f64,
    pub rbar_care: f64,
}

/// Advances the dyad by one decision time.
///
/// Order within a step: at a week start the game decision is recorded; at a day
/// start the day's distress is drawn and the carepartner burden transitions;
/// every slot draws adherence under the current AYA burden, then transitions
/// that burden; at a day end the distress becomes observed; at a week end the
/// relationship quality of the week is drawn from the week's mediators.
pub fn env_step(
    state: &DyadState,
    clock: ClockIndex,
    actions: &ActionBundle,
    params: &DyadParams,
    rng: &mut SimRng,
) -> Result<(DyadState, StepObservation)> {
    actions.validate(clock)?;
    let mut s = state.clone();
    let obs = step_in_place(&mut s, clock, actions, params, rng);
    Ok((s, obs))
}

fn step_in_place(
    s: &mut DyadState,
    clock: ClockIndex,
    actions: &ActionBundle,
    params: &DyadParams,
    rng: &mut SimRng,
) -> StepObservation {
    let scaling = &params.burden_scaling;
    if let Some(a_rel) = actions.a_rel {
        s.rel_action_this_week = a_rel;
        s.week_adherence_hist.clear();
        s.week_distress_hist.clear();
    }
    if let Some(a_care) = actions.a_care {
        s.care_action_today = a_care;
        let x = DistressInputs {
            last_distress: s.last_distress,
            last_adherence: s.last_adherence,
            rel_prev: s.rel_quality_prev_week,
            b_care: s.b_care,
        };
        s.today_distress = distress_next(&params.distress, &x, a_care, std_normal(rng));
        s.raw_burden_care = params.burden_care.next_raw(s.raw_burden_care, a_care, s.rel_action_this_week, std_normal(rng));
        s.b_care = scaling.standardize(Role::Care, s.raw_burden_care);
    }

    let x = AdherenceInputs {
        last_adherence: s.last_adherence,
        rel_prev: s.rel_quality_prev_week,
        last_distress: s.last_distress,
        b_aya: s.b_aya,
    };
    let p = adherence_prob(params.adherence(clock.window()), &x, actions.a_aya, params.mediator_multiplier);
    let adherence = rng.random::<f64>() < p;
    s.raw_burden_aya = params.burden_aya.next_raw(s.raw_burden_aya, actions.a_aya, s.rel_action_this_week, std_normal(rng));
    s.b_aya = scaling.standardize(Role::Aya, s.raw_burden_aya);
    s.last_adherence = adherence;
    s.week_adherence_hist.push(u8::from(adherence));

    let mut distress = None;
    if clock.is_day_end() {
        s.last_distress = s.today_distress;
        s.week_distress_hist.push(s.today_distress);
        distress = Some(s.today_distress);
    }

    let mut relationship = None;
    if clock.is_week_end() {
        let (rbar_aya, rbar_care) = week_mediators(&s.week_adherence_hist, &s.week_distress_hist, params.mediator_discount);
        let x = RelationshipInputs {
            rel_prev: s.rel_quality_prev_week,
            rbar_aya,
            rbar_care,
            b_aya: s.b_aya,
            b_care: s.b_care,
        };
        let p = relationship_prob(&params.relationship, &x, s.rel_action_this_week, params.mediator_multiplier);
        let quality = rng.random::<f64>() < p;
        s.rel_quality_prev_week = quality;
        s.week_adherence_hist.clear();
        s.week_distress_hist.clear();
        relationship = Some(WeekClose { quality, rbar_aya, rbar_care });
    }

    StepObservation { adherence, distress, relationship }
}

/// Everything observed about a dyad so far, indexed by decision time, day or week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    pub initial: InitialObservation,
    /// Adherence per completed slot.
    pub adherence: Vec<u8>,
    /// Standardized AYA burden at each decision time, including the upcoming one.
    pub burden_aya: Vec<f64>,
    /// Standardized carepartner burden at the start of each day, including the upcoming one.
    pub burden_care: Vec<f64>,
    /// Distress per completed day.
    pub distress: Vec<f64>,
    /// Relationship quality per completed week.
    pub relationship: Vec<u8>,
    pub rbar_aya: Vec<f64>,
    pub rbar_care: Vec<f64>,
    pub a_aya: Vec<u8>,
    pub a_care: Vec<u8>,
    pub a_rel: Vec<u8>,
}

impl Observations {
    fn new(initial: InitialObservation, b_aya: f64, b_care: f64) -> Self {
        Observations {
            initial,
            adherence: Vec::with_capacity(HORIZON),
            burden_aya: {
                let mut v = Vec::with_capacity(HORIZON + 1);
                v.push(b_aya);
                v
            },
            burden_care: {
                let mut v = Vec::with_capacity(DAYS_TOTAL + 1);
                v.push(b_care);
                v
            },
            distress: Vec::with_capacity(DAYS_TOTAL),
            relationship: Vec::with_capacity(WEEKS as usize),
            rbar_aya: Vec::with_capacity(WEEKS as usize),
            rbar_care: Vec::with_capacity(WEEKS as usize),
            a_aya: Vec::with_capacity(HORIZON),
            a_care: Vec::with_capacity(DAYS_TOTAL),
            a_rel: Vec::with_capacity(WEEKS as usize),
        }
    }

    /// Adherence at the slot before decision index `i` (initial value for `i = 0`).
    pub fn prev_adherence(&self, i: usize) -> f64 {
        match i.checked_sub(1) {
            Some(j) => f64::from(self.adherence[j]),
            None => f64::from(u8::from(self.initial.adherence)),
        }
    }

    /// Distress of the day before day index `d`.
    pub fn prev_distress(&self, d: usize) -> f64 {
        match d.checked_sub(1) {
            Some(j) => self.distress[j],
            None => self.initial.distress,
        }
    }

    /// Relationship quality at the end of the week before week index `w`.
    pub fn prev_relationship(&self, w: usize) -> f64 {
        match w.checked_sub(1) {
            Some(j) => f64::from(self.relationship[j]),
            None => f64::from(u8::from(self.initial.relationship)),
        }
    }

    /// Weighted mediator sums of the week before week index `w`.
    pub fn prev_mediators(&self, w: usize) -> (f64, f64) {
        match w.checked_sub(1) {
            Some(j) => (self.rbar_aya[j], self.rbar_care[j]),
            None => (self.initial.rbar_aya, self.initial.rbar_care),
        }
    }

    /// Total adherence so far.
    pub fn total_adherence(&self) -> u32 {
        self.adherence.iter().map(|&r| u32::from(r)).sum()
    }
}

/// Stateful wrapper running one dyad through the 196 decision times.
#[derive(Debug, Clone)]
pub struct DyadSimulator<'p> {
    params: &'p DyadParams,
    state: DyadState,
    next: Option<ClockIndex>,
    obs: Observations,
    rng: SimRng,
}

impl<'p> DyadSimulator<'p> {
    pub fn new(params: &'p DyadParams, mut rng: SimRng) -> Self {
        let (state, initial) = DyadState::initial(params, &mut rng);
        let obs = Observations::new(initial, state.b_aya, state.b_care);
        DyadSimulator { params, state, next: Some(ClockIndex::FIRST), obs, rng }
    }

    pub fn params(&self) -> &DyadParams {
        self.params
    }

    /// The decision time awaiting actions, or `None` once the trial is over.
    pub fn clock(&self) -> Option<ClockIndex> {
        self.next
    }

    pub fn state(&self) -> &DyadState {
        &self.state
    }

    pub fn observations(&self) -> &Observations {
        &self.obs
    }

    pub fn into_observations(self) -> Observations {
        self.obs
    }

    pub fn step(&mut self, actions: &ActionBundle) -> Result<StepObservation> {
        let clock = self.next.ok_or_else(|| contract("step called after the final decision time"))?;
        actions.validate(clock)?;
        let o = step_in_place(&mut self.state, clock, actions, self.params, &mut self.rng);
        self.obs.a_aya.push(u8::from(actions.a_aya));
        if let Some(a) = actions.a_care {
            self.obs.a_care.push(u8::from(a));
            self.obs.burden_care.push(self.state.b_care);
        }
        if let Some(a) = actions.a_rel {
            self.obs.a_rel.push(u8::from(a));
        }
        self.obs.adherence.push(u8::from(o.adherence));
        self.obs.burden_aya.push(self.state.b_aya);
        if let Some(d) = o.distress {
            self.obs.distress.push(d);
        }
        if let Some(w) = o.relationship {
            self.obs.relationship.push(u8::from(w.quality));
            self.obs.rbar_aya.push(w.rbar_aya);
            self.obs.rbar_care.push(w.rbar_care);
        }
        self.next = clock.succ();
        Ok(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::population::{generate_population, impute_population, PopulationConfig};
    use rand::SeedableRng;

    fn dyad() -> DyadParams {
        let pop = generate_population(11, 4, &PopulationConfig::default()).unwrap();
        impute_population(&pop, 0.5, 3).unwrap().remove(0)
    }

    fn run(params: &DyadParams, seed: u64, policy: impl Fn(ClockIndex) -> ActionBundle) -> Observations {
        let mut sim = DyadSimulator::new(params, SimRng::seed_from_u64(seed));
        while let Some(c) = sim.clock() {
            sim.step(&policy(c)).unwrap();
        }
        sim.into_observations()
    }

    #[test]
    fn schedule_counts() {
        let p = dyad();
        let obs = run(&p, 1, |c| ActionBundle::gated(c, true, false, true));
        assert_eq!(obs.adherence.len(), 196);
        assert_eq!(obs.distress.len(), 98);
        assert_eq!(obs.relationship.len(), 14);
        assert_eq!(obs.burden_aya.len(), 197);
        assert_eq!(obs.burden_care.len(), 99);
        assert_eq!((obs.a_aya.len(), obs.a_care.len(), obs.a_rel.len()), (196, 98, 14));
    }

    #[test]
    fn same_seed_same_trajectory() {
        let p = dyad();
        let f = |c: ClockIndex| ActionBundle::gated(c, c.index() % 3 == 0, c.day() % 2 == 0, c.week() % 2 == 1);
        assert_eq!(run(&p, 5, f), run(&p, 5, f));
        assert_ne!(run(&p, 5, f).adherence, run(&p, 6, f).adherence);
    }

    #[test]
    fn step_after_end_is_an_error() {
        let p = dyad();
        let mut sim = DyadSimulator::new(&p, SimRng::seed_from_u64(0));
        while let Some(c) = sim.clock() {
            sim.step(&ActionBundle::none(c)).unwrap();
        }
        assert!(sim.step(&ActionBundle::evening(false)).is_err());
    }

    #[test]
    fn inconsistent_actions_are_rejected() {
        let p = dyad();
        let (s, _) = DyadState::initial(&p, &mut SimRng::seed_from_u64(0));
        let c = ClockIndex::new(1, 2, 2).unwrap();
        let r = env_step(&s, c, &ActionBundle::day_start(true, true), &p, &mut SimRng::seed_from_u64(0));
        assert!(matches!(r, Err(crate::Error::Contract(_))));
    }

    #[test]
    fn env_step_is_pure_given_stream() {
        let p = dyad();
        let (s, _) = DyadState::initial(&p, &mut SimRng::seed_from_u64(2));
        let c = ClockIndex::FIRST;
        let a = ActionBundle::week_start(true, true, false);
        let x = env_step(&s, c, &a, &p, &mut SimRng::seed_from_u64(4)).unwrap();
        let y = env_step(&s, c, &a, &p, &mut SimRng::seed_from_u64(4)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn histories_reset_each_week() {
        let p = dyad();
        let mut sim = DyadSimulator::new(&p, SimRng::seed_from_u64(8));
        while let Some(c) = sim.clock() {
            sim.step(&ActionBundle::none(c)).unwrap();
            let s = sim.state();
            assert!(s.week_adherence_hist.len() <= 14 && s.week_distress_hist.len() <= 7);
            if c.is_week_end() {
                assert!(s.week_adherence_hist.is_empty());
            }
        }
    }

    #[test]
    fn mediators_match_week_histories() {
        let p = dyad();
        let obs = run(&p, 3, |c| ActionBundle::gated(c, true, true, false));
        for w in 0..14 {
            let adh = &obs.adherence[w * 14..(w + 1) * 14];
            let dis = &obs.distress[w * 7..(w + 1) * 7];
            let (a, c) = week_mediators(adh, dis, p.mediator_discount);
            assert_eq!(a, obs.rbar_aya[w]);
            assert_eq!(c, obs.rbar_care[w]);
        }
    }

    #[test]
    fn probabilities_and_values_stay_finite() {
        let p = dyad();
        let obs = run(&p, 12, |c| ActionBundle::gated(c, true, true, true));
        assert!(obs.distress.iter().all(|d| d.is_finite()));
        assert!(obs.burden_aya.iter().chain(&obs.burden_care).all(|b| b.is_finite()));
    }
}
