use super::*;
use crate::env::population::{generate_population, impute_population, PopulationConfig};
use crate::env::{calibrate_population, DyadParams};
use crate::rl::{FeatureMap, RlsviConfig};
use crate::seed::SeedTree;

fn dyads(n: usize) -> Vec<DyadParams> {
    let pop = generate_population(5, n, &PopulationConfig::default()).unwrap();
    let pop = calibrate_population(&pop, 5).unwrap();
    impute_population(&pop, 0.8, 5).unwrap()
}

fn run<C: Controller>(c: &mut C, pop: &[DyadParams], seed: u64) -> Vec<crate::env::Observations> {
    let root = SeedTree::new(seed);
    let mut prng = root.named("policy").rng();
    pop.iter().enumerate().map(|(k, p)| run_dyad(c, p, root.child(k as u64).rng(), &mut prng).unwrap()).collect()
}

#[test]
fn feature_dimensions() {
    assert_eq!(single::SINGLE_FEATURES.dim(), 40);
    assert_eq!(multi::AYA_FEATURES.dim(), 10);
    assert_eq!(multi::CARE_FEATURES.dim(), 10);
    assert_eq!(multi::REL_FEATURES.dim(), 12);
    assert_eq!(AgentKind::Rel.state_dim(), 5);
}

#[test]
fn single_agent_records_every_slot() {
    let pop = dyads(2);
    let mut p = SingleAgentPolicy::new(RlsviConfig::default()).unwrap();
    run(&mut p, &pop[..1], 1);
    assert_eq!(p.agent.dataset.len(), 196);
    run(&mut p, &pop[1..], 2);
    assert_eq!(p.agent.dataset.len(), 392);
}

#[test]
fn multi_agent_dataset_sizes() {
    let pop = dyads(1);
    for s in [false, true] {
        let mut p = MultiAgentPolicy::new(s, RlsviConfig::default()).unwrap();
        run(&mut p, &pop, 1);
        assert_eq!((p.aya.dataset.len(), p.care.dataset.len(), p.rel.dataset.len()), (196, 98, 14));
        assert_eq!((p.surrogate.rel.len(), p.surrogate.care.len()), (14, 98));
    }
}

#[test]
fn naive_rewards_lie_in_unit_interval() {
    let pop = dyads(2);
    let mut p = MultiAgentPolicy::new(false, RlsviConfig::default()).unwrap();
    run(&mut p, &pop, 3);
    let all = p.care.dataset.rewards().iter().chain(p.rel.dataset.rewards());
    assert!(all.into_iter().all(|r| (0.0..=1.0).contains(r)));
}

#[test]
fn naive_relationship_reward_of_full_adherence_week_is_one() {
    let p = MultiAgentPolicy::new(false, RlsviConfig::default()).unwrap();
    let mut obs = run(&mut uniform_random(), &dyads(1), 4).remove(0);
    obs.adherence[14..28].fill(1);
    assert_eq!(p.rel_reward(&obs, 1), 1.0);
    assert_eq!(p.care_reward(&obs, 7), 1.0);
}

#[test]
fn relationship_agent_targets_equal_rewards() {
    assert_eq!(multi::REL_GAMMA, 0.0);
}

#[test]
fn surrogate_off_reproduces_naive() {
    let pop = dyads(3);
    let mut naive = MultiAgentPolicy::new(false, RlsviConfig::default()).unwrap();
    let mut off = MultiAgentPolicy::new(true, RlsviConfig::default()).unwrap();
    off.use_surrogate = false;
    let a = run(&mut naive, &pop, 9);
    let b = run(&mut off, &pop, 9);
    assert_eq!(a, b);
    assert_eq!(naive.aya.theta, off.aya.theta);
    let mut on = MultiAgentPolicy::new(true, RlsviConfig::default()).unwrap();
    let c = run(&mut on, &pop, 9);
    assert_ne!(a, c);
}

#[test]
fn game_action_in_state_is_the_one_taken() {
    let pop = dyads(1);
    let mut p = MultiAgentPolicy::new(true, RlsviConfig::default()).unwrap();
    let obs = run(&mut p, &pop, 6).remove(0);
    let ts: Vec<_> = (0..p.aya.dataset.len()).map(|i| p.aya.dataset.transition(i)).collect();
    for (i, t) in ts.iter().enumerate() {
        assert_eq!(t.state[3], f64::from(obs.a_rel[i / 14]));
    }
    let ts: Vec<_> = (0..p.care.dataset.len()).map(|i| p.care.dataset.transition(i)).collect();
    for (d, t) in ts.iter().enumerate() {
        assert_eq!(t.state[3], f64::from(obs.a_rel[d / 7]));
        assert_eq!(t.action, obs.a_care[d]);
    }
}

#[test]
fn single_agent_inert_components_are_recorded() {
    let pop = dyads(1);
    let mut p = SingleAgentPolicy::new(RlsviConfig::default()).unwrap();
    let obs = run(&mut p, &pop, 12).remove(0);
    for i in 0..196 {
        let t = p.agent.dataset.transition(i);
        assert_eq!(t.action & 1, obs.a_aya[i]);
        if i % 2 == 0 {
            assert_eq!((t.action >> 1) & 1, obs.a_care[i / 2]);
        }
        if i % 14 == 0 {
            assert_eq!((t.action >> 2) & 1, obs.a_rel[i / 14]);
        }
    }
}

#[test]
fn positive_action_coefficients_send_everything() {
    let pop = dyads(1);
    let mut p = SingleAgentPolicy::new(RlsviConfig::default()).unwrap();
    let sim = crate::env::DyadSimulator::new(&pop[0], SeedTree::new(1).rng());
    // A huge positive action coefficient survives one refit on an empty dataset.
    p.agent.theta[10] = 1e9;
    p.agent.theta[11] = 1e9;
    p.agent.theta[12] = 1e9;
    p.agent.perturb_w = p.agent.theta.clone() * 2.0;
    let c = sim.clock().unwrap();
    let a = p.decide(c, sim.state(), sim.observations(), &mut SeedTree::new(2).rng()).unwrap();
    assert_eq!(a, crate::env::ActionBundle::week_start(true, true, true));
}

#[test]
fn fixed_components_follow_their_probability() {
    let pop = dyads(4);
    let mut p = MultiAgentPolicy::new(true, RlsviConfig::default())
        .unwrap()
        .with_modes([ComponentMode::Fixed(1.0), ComponentMode::Fixed(0.0), ComponentMode::Learn])
        .unwrap();
    let obs = run(&mut p, &pop, 2);
    assert!(obs.iter().all(|o| o.a_aya.iter().all(|&a| a == 1) && o.a_care.iter().all(|&a| a == 0)));
    assert_eq!((p.aya.dataset.len(), p.care.dataset.len(), p.rel.dataset.len()), (0, 0, 56));
    assert_eq!(p.counts.decisions, [784, 392, 56]);
    assert_eq!(p.counts.rate(0), 1.0);
}

#[test]
fn zero_data_surrogate_keeps_priors() {
    let p = MultiAgentPolicy::new(true, RlsviConfig::default()).unwrap();
    assert_eq!(p.surrogate.rel.beta.as_slice(), &REL_PRIOR);
    assert_eq!(p.surrogate.care.beta.as_slice(), &CARE_PRIOR);
}

#[test]
fn snapshot_round_trip() {
    let pop = dyads(1);
    let mut p = MultiAgentPolicy::new(true, RlsviConfig::default()).unwrap();
    run(&mut p, &pop, 1);
    let s = PolicySnapshot::multi(&p);
    assert_eq!(PolicySnapshot::from_json(&s.to_json()).unwrap(), s);
    assert_eq!(s.agents.iter().map(|a| a.n_transitions).collect::<Vec<_>>(), vec![196, 98, 14]);
    let bad = s.to_json().replace("\"format_version\": 1", "\"format_version\": 7");
    assert!(PolicySnapshot::from_json(&bad).is_err());
}
