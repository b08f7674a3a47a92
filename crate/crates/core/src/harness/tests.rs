use super::*;
use crate::env::{calibrate_population, generate_population, testbed_at, PopulationConfig, QLearningConfig, SteSettings, Testbed, VariantKind, HORIZON};

fn small_testbed(kind: VariantKind) -> Testbed {
    let pop = generate_population(2, 12, &PopulationConfig::default()).unwrap();
    let pop = calibrate_population(&pop, 2).unwrap();
    let s = SteSettings { n_eval: 10, q_learning: QLearningConfig { n_trajectories: 100, ..Default::default() }, ..Default::default() };
    testbed_at(&pop, 0.5, kind, &s).unwrap()
}

fn cfg(a: Algorithm, t: &Testbed, runs: usize) -> TrialConfig {
    TrialConfig { n_dyads: 3, n_runs: runs, master_seed: 11, ..TrialConfig::new(a, t.ste) }
}

#[test]
fn trial_is_deterministic_and_well_formed() {
    let t = small_testbed(VariantKind::Vanilla);
    let c = cfg(Algorithm::MultiAgentSurrogate, &t, 3);
    let a = run_trial(&c, &t).unwrap();
    let b = run_trial(&c, &t).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.runs.len(), 3);
    for r in &a.runs {
        assert_eq!(r.adherence.len(), 3 * HORIZON);
        assert!(r.total() as usize <= 3 * HORIZON);
    }
}

#[test]
fn algorithms_share_dyad_sequences() {
    let t = small_testbed(VariantKind::Vanilla);
    let a = run_trial(&cfg(Algorithm::SingleAgent, &t, 4), &t).unwrap();
    let b = run_trial(&cfg(Algorithm::UniformRandom, &t, 4), &t).unwrap();
    for (x, y) in a.runs.iter().zip(&b.runs) {
        assert_eq!(x.dyads, y.dyads);
    }
    assert_ne!(a.runs[0].dyads, a.runs[1].dyads);
    let curve = cumulative_improvement(&a, &b, Aggregation::Summed).unwrap();
    assert_eq!(curve.mean.len(), 3);
}

#[test]
fn random_against_itself_is_flat() {
    let t = small_testbed(VariantKind::Vanilla);
    let a = run_trial(&cfg(Algorithm::UniformRandom, &t, 5), &t).unwrap();
    let b = run_trial(&cfg(Algorithm::FixedProb { p_aya: 0.5, p_care: 0.5, p_rel: 0.5 }, &t, 5), &t).unwrap();
    let c = cumulative_improvement(&a, &b, Aggregation::PerDyad).unwrap();
    assert!(c.mean.iter().all(|&m| m == 0.0));
}

#[test]
fn calibration_mismatch_is_a_configuration_error() {
    let t = small_testbed(VariantKind::Vanilla);
    let mut c = cfg(Algorithm::UniformRandom, &t, 1);
    c.ste_target = t.ste + 0.06;
    assert!(matches!(run_trial(&c, &t), Err(crate::Error::Config(_))));
    c.ste_target = t.ste + 0.04;
    assert!(run_trial(&c, &t).is_ok());
    c.ste_target = t.ste;
    c.variant = VariantKind::NoMediator;
    assert!(run_trial(&c, &t).is_err());
}

#[test]
fn invalid_trials_are_rejected() {
    let t = small_testbed(VariantKind::Vanilla);
    let mut c = cfg(Algorithm::FixedProb { p_aya: 1.5, p_care: 0.0, p_rel: 0.0 }, &t, 1);
    assert!(run_trial(&c, &t).is_err());
    c.algorithm = Algorithm::OptimalApprox;
    c.n_dyads = 0;
    assert!(run_trial(&c, &t).is_err());
}

#[test]
fn optimal_policy_runs_as_a_trial() {
    let t = small_testbed(VariantKind::Vanilla);
    let m = run_trial(&cfg(Algorithm::OptimalApprox, &t, 2), &t).unwrap();
    assert_eq!(m.runs.len(), 2);
}

#[test]
fn empty_grid_gives_empty_report() {
    let s = AblationSettings { n_runs: 2, n_dyads: 2, rlsvi: Default::default(), seed: 0 };
    let r = ablation_suite(&[], &Algorithm::LEARNERS, &s).unwrap();
    assert!(r.cells.is_empty());
}

#[test]
fn ablation_cell_reports_overlap_only_for_no_mediator() {
    let s = AblationSettings { n_runs: 3, n_dyads: 2, rlsvi: Default::default(), seed: 0 };
    let v = small_testbed(VariantKind::Vanilla);
    let n = small_testbed(VariantKind::NoMediator);
    let cells = [AblationCell { ste_target: v.ste, testbed: &v }, AblationCell { ste_target: n.ste, testbed: &n }];
    let r = ablation_suite(&cells, &[Algorithm::MultiAgent, Algorithm::MultiAgentSurrogate], &s).unwrap();
    assert_eq!(r.cells.len(), 2);
    assert!(r.cells[0].surrogate_matches_naive.is_none());
    assert!(r.cells[1].surrogate_matches_naive.is_some());
    assert_eq!(r.cells[1].results[0].per_dyad.mean.len(), 2);
}

#[test]
fn collaboration_counts_only_the_trained_component() {
    let t = small_testbed(VariantKind::Vanilla);
    let fixed = FixedProbs { p_aya: 0.25, p_care: 0.5, p_rel: 0.5 };
    let r = collaboration_experiment(&t, Component::Rel, fixed, 3, Default::default(), 1).unwrap();
    assert_eq!(r.decisions, 3 * 14);
    assert!((0.0..=1.0).contains(&r.rate));
    let r = collaboration_experiment(&t, Component::Care, fixed, 2, Default::default(), 1).unwrap();
    assert_eq!(r.decisions, 2 * 98);
    assert!(collaboration_experiment(&t, Component::Aya, fixed, 2, Default::default(), 1).is_err());
}

#[test]
fn sweep_with_no_effect_is_flat() {
    let pop = generate_population(2, 5, &PopulationConfig::default()).unwrap();
    let pop = calibrate_population(&pop, 2).unwrap();
    let base = FixedProbs { p_aya: 0.5, p_care: 0.5, p_rel: 0.5 };
    let pts = fixed_prob_sweep(&pop, base, Component::Rel, &[0.0, 0.5, 1.0], 20, 3).unwrap();
    // Without imputed effects the actions change nothing, and paired rollouts agree exactly.
    assert!(pts.iter().all(|p| p.mean == pts[0].mean));
    assert_eq!(best_probability(&pts), Some(0.0));
    assert!(fixed_prob_sweep(&pop, base, Component::Rel, &[1.2], 2, 3).is_err());
}
