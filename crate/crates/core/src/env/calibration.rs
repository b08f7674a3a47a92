//! Burden standardization and calibration of the treatment-effect scale.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{std_normal, BurdenCoeffs, BurdenScaling, DyadParams};
use super::optimal::{approx_optimal_policy, QLearningConfig, TabularPolicy};
use super::population::{impute_population, make_variant, TestbedVariant, VariantKind};
use super::rollout::{evaluate_paired, mean_se, EnvPolicy, NoIntervention};
use crate::error::{config, Error, Result};
use crate::seed::SeedTree;

/// Burden transitions simulated to estimate the standardization statistics.
pub const BURDEN_CALIBRATION_STEPS: usize = 100_000;

/// Simulates a raw burden stream under i.i.d. Bernoulli(0.5) actions.
pub fn simulate_raw_burden<R: Rng + ?Sized>(coeffs: &BurdenCoeffs, steps: usize, rng: &mut R) -> Vec<f64> {
    let t = &coeffs.theta;
    let mut raw = ((t[0] + 0.5 * (t[2] + t[3])) / (1.0 - t[1])).max(0.0);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let a_own = rng.random::<f64>() < 0.5;
        let a_rel = rng.random::<f64>() < 0.5;
        raw = coeffs.next_raw(raw, a_own, a_rel, std_normal(rng));
        out.push(raw);
    }
    out
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Estimates the burden standardization statistics of one dyad.
pub fn calibrate_burden_scaling<R: Rng + ?Sized>(params: &DyadParams, steps: usize, rng: &mut R) -> Result<DyadParams> {
    if steps < 2 {
        return Err(config("burden calibration needs at least two steps"));
    }
    let (mean_aya, sd_aya) = mean_sd(&simulate_raw_burden(&params.burden_aya, steps, rng));
    let (mean_care, sd_care) = mean_sd(&simulate_raw_burden(&params.burden_care, steps, rng));
    if !(sd_aya >= 1e-9 && sd_care >= 1e-9) {
        return Err(Error::Calibration(format!("degenerate burden sd (aya {sd_aya}, care {sd_care})")));
    }
    let mut p = params.clone();
    p.burden_scaling = BurdenScaling { mean_aya, sd_aya, mean_care, sd_care };
    Ok(p)
}

/// Calibrates every dyad; dyad `i` uses stream `i` below `seed`.
pub fn calibrate_population(population: &[DyadParams], seed: u64) -> Result<Vec<DyadParams>> {
    let root = SeedTree::new(seed).named("burden");
    population
        .iter()
        .enumerate()
        .map(|(i, p)| calibrate_burden_scaling(p, BURDEN_CALIBRATION_STEPS, &mut root.child(i as u64).rng()))
        .collect()
}

/// Standardized treatment effect of `policy` against never intervening.
///
/// Each dyad is rolled out `n_eval` times under both policies with shared
/// environment streams; the mean per-dyad gain is divided by the across-dyad
/// standard deviation of the per-dyad baseline means.
pub fn compute_ste<P: EnvPolicy>(population: &[DyadParams], policy: &P, n_eval: usize, seed: u64) -> Result<f64> {
    if n_eval < 2 {
        return Err(config("compute_ste needs n_eval >= 2"));
    }
    if population.len() < 2 {
        return Err(Error::UndefinedSte("fewer than two dyads".into()));
    }
    let root = SeedTree::new(seed).named("ste");
    let mut gains = Vec::with_capacity(population.len());
    let mut base = Vec::with_capacity(population.len());
    for (i, dyad) in population.iter().enumerate() {
        let t = evaluate_paired(std::slice::from_ref(dyad), &[policy, &NoIntervention], n_eval, root.child(i as u64).value());
        let m = |v: &[u32]| v.iter().map(|&x| f64::from(x)).sum::<f64>() / n_eval as f64;
        gains.push(m(&t[0]) - m(&t[1]));
        base.push(m(&t[1]));
    }
    let (_, sd) = mean_sd(&base);
    if !(sd > 0.0) {
        return Err(Error::UndefinedSte("no across-dyad variance under the baseline policy".into()));
    }
    Ok(mean_se(&gains).0 / sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SteSettings {
    /// Rollouts per dyad and policy.
    pub n_eval: usize,
    pub q_learning: QLearningConfig,
    /// Absolute tolerance of the bisection.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SteSettings {
    fn default() -> Self {
        SteSettings { n_eval: 100, q_learning: QLearningConfig::default(), tolerance: 0.03, max_iterations: 30, seed: 0 }
    }
}

/// A population imputed at one `c_treat`, with its optimal-policy approximation.
#[derive(Debug, Clone)]
pub struct Testbed {
    pub c_treat: f64,
    pub kind: VariantKind,
    pub ste: f64,
    pub population: Vec<DyadParams>,
    pub optimal: TabularPolicy,
}

/// Imputes `base` at `c_treat`, applies the variant, fits the optimal policy
/// and measures the STE.
pub fn testbed_at(base: &[DyadParams], c_treat: f64, kind: VariantKind, s: &SteSettings) -> Result<Testbed> {
    let root = SeedTree::new(s.seed);
    let imputed = impute_population(base, c_treat, root.named("impute").value())?;
    let variant = TestbedVariant { kind, c_treat };
    let population = make_variant(&imputed, &variant, &mut root.named("variant").rng());
    let optimal = approx_optimal_policy(&population, &s.q_learning, root.named("optimal").value())?;
    let ste = compute_ste(&population, &optimal, s.n_eval, root.named("ste").value())?;
    Ok(Testbed { c_treat, kind, ste, population, optimal })
}

/// Finds `c_treat` whose STE lies within `tolerance` of `target` by bisection.
///
/// The upper bracket doubles from 1 until the STE exceeds the target.
pub fn calibrate_c_treat(base: &[DyadParams], target: f64, kind: VariantKind, s: &SteSettings) -> Result<Testbed> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(config(format!("STE target must be positive, got {target}")));
    }
    let close = |t: &Testbed| (t.ste - target).abs() <= s.tolerance / 3.0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut best: Option<Testbed> = None;
    let consider = |t: Testbed, best: &mut Option<Testbed>| {
        if best.as_ref().is_none_or(|b| (t.ste - target).abs() < (b.ste - target).abs()) {
            *best = Some(t);
        }
    };
    let mut iterations = 0;
    loop {
        let t = testbed_at(base, hi, kind, s)?;
        log::info!("bracket c_treat {hi:.4}: STE {:.4}", t.ste);
        iterations += 1;
        let above = t.ste >= target;
        if close(&t) {
            return Ok(t);
        }
        consider(t, &mut best);
        if above {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if iterations >= s.max_iterations || hi > 1e3 {
            return Err(Error::Calibration(format!("STE never reached {target} (c_treat up to {lo})")));
        }
    }
    while iterations < s.max_iterations {
        let mid = 0.5 * (lo + hi);
        let t = testbed_at(base, mid, kind, s)?;
        log::info!("bisect c_treat {mid:.4}: STE {:.4}", t.ste);
        iterations += 1;
        if close(&t) {
            return Ok(t);
        }
        if t.ste < target {
            lo = mid;
        } else {
            hi = mid;
        }
        consider(t, &mut best);
    }
    match best {
        Some(t) if (t.ste - target).abs() <= s.tolerance => Ok(t),
        Some(t) => Err(Error::Calibration(format!("bisection ended at STE {:.4} for target {target}", t.ste))),
        None => Err(Error::Calibration("no bisection steps taken".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::model::Role;

    #[test]
    fn standardized_stream_has_unit_scale() {
        let p = DyadParams::default();
        let p = calibrate_burden_scaling(&p, BURDEN_CALIBRATION_STEPS, &mut SeedTree::new(1).rng()).unwrap();
        let mut rng = SeedTree::new(2).rng();
        for (role, coeffs) in [(Role::Aya, p.burden_aya), (Role::Care, p.burden_care)] {
            let z: Vec<f64> = simulate_raw_burden(&coeffs, BURDEN_CALIBRATION_STEPS, &mut rng)
                .into_iter()
                .map(|r| p.burden_scaling.standardize(role, r))
                .collect();
            let (m, sd) = mean_sd(&z);
            assert!(m.abs() < 0.05, "{role:?} mean {m}");
            assert!((sd - 1.0).abs() < 0.05, "{role:?} sd {sd}");
        }
    }

    #[test]
    fn truncated_ar1_still_centres() {
        let mut p = DyadParams::default();
        p.burden_aya = BurdenCoeffs { theta: [0.0, 13.0 / 14.0, 0.0, 0.0], noise_sd: 1.0 };
        let p = calibrate_burden_scaling(&p, BURDEN_CALIBRATION_STEPS, &mut SeedTree::new(3).rng()).unwrap();
        let raw = simulate_raw_burden(&p.burden_aya, BURDEN_CALIBRATION_STEPS, &mut SeedTree::new(4).rng());
        assert!(raw.iter().all(|&r| r >= 0.0));
        let z: Vec<f64> = raw.iter().map(|&r| p.burden_scaling.standardize(Role::Aya, r)).collect();
        assert!(mean_sd(&z).0.abs() < 0.05);
    }

    #[test]
    fn calibration_is_deterministic() {
        let p = DyadParams::default();
        let a = calibrate_burden_scaling(&p, 5000, &mut SeedTree::new(9).rng()).unwrap();
        let b = calibrate_burden_scaling(&p, 5000, &mut SeedTree::new(9).rng()).unwrap();
        assert_eq!(a.burden_scaling, b.burden_scaling);
    }

    #[test]
    fn degenerate_burden_is_rejected() {
        let mut p = DyadParams::default();
        p.burden_care = BurdenCoeffs { theta: [-5.0, 0.0, 0.0, 0.0], noise_sd: 1e-3 };
        let r = calibrate_burden_scaling(&p, 1000, &mut SeedTree::new(1).rng());
        assert!(matches!(r, Err(Error::Calibration(_))));
    }

    #[test]
    fn ste_of_baseline_against_itself_is_zero() {
        use crate::env::population::{generate_population, PopulationConfig};
        let pop = generate_population(1, 6, &PopulationConfig::default()).unwrap();
        let pop = calibrate_population(&pop, 1).unwrap();
        let pop = impute_population(&pop, 0.5, 1).unwrap();
        assert_eq!(compute_ste(&pop, &NoIntervention, 5, 2).unwrap(), 0.0);
    }

    #[test]
    fn n_eval_below_two_is_rejected() {
        let pop = vec![DyadParams::default(); 2];
        assert!(compute_ste(&pop, &NoIntervention, 1, 0).is_err());
    }
}
