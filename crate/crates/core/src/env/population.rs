//! Synthetic dyad populations, treatment-effect imputation and testbed variants.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{std_normal, AdherenceCoeffs, BurdenCoeffs, DyadParams};
use crate::error::{config, Result};
use crate::seed::SimRng;

/// Population mean and across-dyad standard deviation of one coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
}

impl Spread {
    pub const fn new(mean: f64, sd: f64) -> Self {
        Spread { mean, sd }
    }

    pub const fn fixed(mean: f64) -> Self {
        Spread { mean, sd: 0.0 }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.mean + self.sd * std_normal(rng)
    }

    fn check(&self, name: &str) -> Result<()> {
        if !self.mean.is_finite() || !self.sd.is_finite() || self.sd < 0.0 {
            return Err(config(format!("{name}: mean must be finite and sd non-negative, got {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdherencePrior {
    pub b0: Spread,
    pub b1: Spread,
    pub b2: Spread,
    pub b3: Spread,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistressPrior {
    pub b0: Spread,
    pub b1: Spread,
    pub b2: Spread,
    pub b3: Spread,
    pub noise_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationshipPrior {
    pub b0: Spread,
    pub b1: Spread,
    pub b2: Spread,
    pub b3: Spread,
}

/// Population-level description from which dyads are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationConfig {
    pub adherence_am: AdherencePrior,
    pub adherence_pm: AdherencePrior,
    pub distress: DistressPrior,
    pub relationship: RelationshipPrior,
    pub burden_aya: BurdenCoeffs,
    pub burden_care: BurdenCoeffs,
    pub mediator_multiplier: f64,
    pub mediator_discount: f64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        let adherence = |b0: f64| AdherencePrior {
            b0: Spread::new(b0, 0.6),
            b1: Spread::new(1.5, 0.1),
            b2: Spread::new(0.3, 0.15),
            b3: Spread::fixed(0.0),
        };
        PopulationConfig {
            adherence_am: adherence(-0.3),
            adherence_pm: adherence(-0.4),
            distress: DistressPrior {
                b0: Spread::new(0.0, 0.2),
                b1: Spread::new(0.5, 0.1),
                b2: Spread::new(-0.1, 0.05),
                b3: Spread::new(-0.2, 0.1),
                noise_sd: 1.0,
            },
            relationship: RelationshipPrior {
                b0: Spread::new(-1.0, 0.3),
                b1: Spread::new(1.0, 0.2),
                b2: Spread::new(0.1, 0.03),
                b3: Spread::new(-0.3, 0.1),
            },
            burden_aya: BurdenCoeffs::aya_default(),
            burden_care: BurdenCoeffs::care_default(),
            mediator_multiplier: 1.0,
            mediator_discount: 0.9,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("adherence_am", &self.adherence_am), ("adherence_pm", &self.adherence_pm)] {
            for (k, s) in [("b0", p.b0), ("b1", p.b1), ("b2", p.b2), ("b3", p.b3)] {
                s.check(&format!("{name}.{k}"))?;
            }
        }
        let d = &self.distress;
        for (k, s) in [("b0", d.b0), ("b1", d.b1), ("b2", d.b2), ("b3", d.b3)] {
            s.check(&format!("distress.{k}"))?;
        }
        if !(d.noise_sd > 0.0 && d.noise_sd.is_finite()) {
            return Err(config(format!("distress.noise_sd must be positive, got {}", d.noise_sd)));
        }
        let r = &self.relationship;
        for (k, s) in [("b0", r.b0), ("b1", r.b1), ("b2", r.b2), ("b3", r.b3)] {
            s.check(&format!("relationship.{k}"))?;
        }
        for (name, b) in [("burden_aya", &self.burden_aya), ("burden_care", &self.burden_care)] {
            if !(0.0..1.0).contains(&b.theta[1]) {
                return Err(config(format!("{name}.theta[1] must lie in [0, 1), got {}", b.theta[1])));
            }
            if !(b.noise_sd > 0.0 && b.noise_sd.is_finite()) || b.theta.iter().any(|t| !t.is_finite()) {
                return Err(config(format!("{name}: coefficients must be finite with positive noise sd")));
            }
        }
        if !(self.mediator_multiplier >= 0.0 && self.mediator_multiplier.is_finite()) {
            return Err(config("mediator_multiplier must be non-negative"));
        }
        if !(self.mediator_discount > 0.0 && self.mediator_discount <= 1.0) {
            return Err(config("mediator_discount must lie in (0, 1]"));
        }
        Ok(())
    }
}

fn draw_adherence<R: Rng + ?Sized>(p: &AdherencePrior, rng: &mut R) -> AdherenceCoeffs {
    AdherenceCoeffs {
        b0: p.b0.draw(rng),
        b1: p.b1.draw(rng),
        b2: p.b2.draw(rng),
        b3: p.b3.draw(rng),
        ..Default::default()
    }
}

/// Bound on the drawn distress autocorrelation, keeping the process stationary.
pub const MAX_DISTRESS_PERSISTENCE: f64 = 0.95;

/// Draws `n` dyads as population mean plus Gaussian perturbation, truncated.
///
/// Treatment effects are left at zero and burden scaling at the identity; see
/// [`impute_treatment_effects`] and the calibration module.
pub fn generate_population(seed: u64, n: usize, cfg: &PopulationConfig) -> Result<Vec<DyadParams>> {
    if n == 0 {
        return Err(config("population size must be at least 1"));
    }
    cfg.validate()?;
    let mut rng = crate::seed::SeedTree::new(seed).named("population").rng();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut p = DyadParams {
            adherence_am: draw_adherence(&cfg.adherence_am, &mut rng),
            adherence_pm: draw_adherence(&cfg.adherence_pm, &mut rng),
            burden_aya: cfg.burden_aya,
            burden_care: cfg.burden_care,
            mediator_multiplier: cfg.mediator_multiplier,
            mediator_discount: cfg.mediator_discount,
            ..Default::default()
        };
        let d = &cfg.distress;
        p.distress.b0 = d.b0.draw(&mut rng);
        p.distress.b1 = d.b1.draw(&mut rng).clamp(-MAX_DISTRESS_PERSISTENCE, MAX_DISTRESS_PERSISTENCE);
        p.distress.b2 = d.b2.draw(&mut rng);
        p.distress.b3 = d.b3.draw(&mut rng);
        p.distress.noise_sd = d.noise_sd;
        let r = &cfg.relationship;
        p.relationship.b0 = r.b0.draw(&mut rng);
        p.relationship.b1 = r.b1.draw(&mut rng);
        p.relationship.b2 = r.b2.draw(&mut rng);
        p.relationship.b3 = r.b3.draw(&mut rng);
        p.truncate();
        out.push(p);
    }
    Ok(out)
}

/// Across-dyad standard deviations of the autocorrelation coefficients that
/// set the scale of the treatment-effect heterogeneity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeterogeneityScales {
    pub adherence_am_b1: f64,
    pub adherence_pm_b1: f64,
    pub distress_b1: f64,
    pub relationship_b1: f64,
}

impl HeterogeneityScales {
    pub fn none() -> Self {
        Self::default()
    }

    /// Empirical (sample) standard deviations over a population.
    pub fn empirical(population: &[DyadParams]) -> Self {
        let sd = |f: &dyn Fn(&DyadParams) -> f64| -> f64 {
            let n = population.len();
            if n < 2 {
                return 0.0;
            }
            let m = population.iter().map(f).sum::<f64>() / n as f64;
            (population.iter().map(|p| (f(p) - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        HeterogeneityScales {
            adherence_am_b1: sd(&|p| p.adherence_am.b1),
            adherence_pm_b1: sd(&|p| p.adherence_pm.b1),
            distress_b1: sd(&|p| p.distress.b1),
            relationship_b1: sd(&|p| p.relationship.b1),
        }
    }
}

/// Outcome of imputation for one dyad.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputed {
    pub params: DyadParams,
    /// Models whose `|b1| = 0` left the heterogeneity scale undefined.
    pub skipped_heterogeneity: Vec<&'static str>,
}

/// Adds the per-dyad random effect `tau * sigma_pop / |b1| * z` to a base effect.
fn heterogeneous<R: Rng + ?Sized>(tau: f64, b1: f64, sigma_pop: f64, rng: &mut R, skip: &mut bool) -> f64 {
    // The draw is consumed regardless so that streams stay aligned across c_treat values.
    let z = std_normal(rng);
    if b1.abs() == 0.0 {
        *skip = true;
        return tau;
    }
    tau + tau.abs() * sigma_pop / b1.abs() * z
}

/// Fills every treatment-effect coefficient from the baseline autocorrelations.
///
/// With `m = c_treat * |b1|` of the respective model: AYA `(tau0, tau1, tau2) = (m, m, -m)`
/// per window; carepartner `(tau0, tau1, tau2) = (-m, -m, m)`; relationship
/// `(tau0, tau1) = (m, -m)`. Each effect gets an additive Gaussian random effect
/// whose standard deviation is `|tau| * sigma_pop(b1) / |b1|`.
pub fn impute_treatment_effects<R: Rng + ?Sized>(
    params: &DyadParams,
    c_treat: f64,
    scales: &HeterogeneityScales,
    rng: &mut R,
) -> Result<Imputed> {
    if !(c_treat >= 0.0 && c_treat.is_finite()) {
        return Err(config(format!("c_treat must be non-negative and finite, got {c_treat}")));
    }
    let mut p = params.clone();
    let mut skipped = Vec::new();

    for (name, coeffs, sigma) in [
        ("adherence_am", &mut p.adherence_am, scales.adherence_am_b1),
        ("adherence_pm", &mut p.adherence_pm, scales.adherence_pm_b1),
    ] {
        let m = c_treat * coeffs.b1.abs();
        let mut skip = false;
        coeffs.tau0 = heterogeneous(m, coeffs.b1, sigma, rng, &mut skip);
        coeffs.tau1 = heterogeneous(m, coeffs.b1, sigma, rng, &mut skip);
        coeffs.tau2 = heterogeneous(-m, coeffs.b1, sigma, rng, &mut skip);
        if skip {
            skipped.push(name);
        }
    }

    let d = &mut p.distress;
    let m = c_treat * d.b1.abs();
    let mut skip = false;
    d.tau0 = heterogeneous(-m, d.b1, scales.distress_b1, rng, &mut skip);
    d.tau1 = heterogeneous(-m, d.b1, scales.distress_b1, rng, &mut skip);
    d.tau2 = heterogeneous(m, d.b1, scales.distress_b1, rng, &mut skip);
    if skip {
        skipped.push("distress");
    }

    let r = &mut p.relationship;
    let m = c_treat * r.b1.abs();
    let mut skip = false;
    r.tau0 = heterogeneous(m, r.b1, scales.relationship_b1, rng, &mut skip);
    r.tau1 = heterogeneous(-m, r.b1, scales.relationship_b1, rng, &mut skip);
    if skip {
        skipped.push("relationship");
    }

    for name in &skipped {
        log::warn!("|b1| = 0 in the {name} model; treatment-effect heterogeneity skipped");
    }
    Ok(Imputed { params: p, skipped_heterogeneity: skipped })
}

/// Imputes every dyad of a population with its empirical heterogeneity scales.
///
/// Dyad `i` draws its random effects from stream `i` below `seed`, so the
/// standardized draws are shared across `c_treat` values.
pub fn impute_population(population: &[DyadParams], c_treat: f64, seed: u64) -> Result<Vec<DyadParams>> {
    let scales = HeterogeneityScales::empirical(population);
    let root = crate::seed::SeedTree::new(seed).named("impute");
    population
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng: SimRng = root.child(i as u64).rng();
            impute_treatment_effects(p, c_treat, &scales, &mut rng).map(|x| x.params)
        })
        .collect()
}

/// Controlled modifications of the causal coefficients used for ablations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VariantKind {
    Vanilla,
    /// Relationship no longer affects adherence and distress no longer affects relationship.
    NoMediator,
    /// Adds a negative distress effect on adherence of size `c_treat * |b1|`.
    DirectDistressEffect,
    /// Mediator coefficients replaced by unconstrained `Normal(0, sd)` draws.
    RandomMediator { sd: f64 },
}

impl VariantKind {
    pub fn label(&self) -> &'static str {
        match self {
            VariantKind::Vanilla => "vanilla",
            VariantKind::NoMediator => "no_mediator",
            VariantKind::DirectDistressEffect => "direct_distress",
            VariantKind::RandomMediator { .. } => "random_mediator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestbedVariant {
    pub kind: VariantKind,
    pub c_treat: f64,
}

impl TestbedVariant {
    pub fn vanilla(c_treat: f64) -> Self {
        TestbedVariant { kind: VariantKind::Vanilla, c_treat }
    }
}

/// Applies a variant's coefficient surgery to every dyad.
pub fn make_variant<R: Rng + ?Sized>(population: &[DyadParams], variant: &TestbedVariant, rng: &mut R) -> Vec<DyadParams> {
    population
        .iter()
        .map(|p| {
            let mut p = p.clone();
            match variant.kind {
                VariantKind::Vanilla => {}
                VariantKind::NoMediator => {
                    p.adherence_am.b2 = 0.0;
                    p.adherence_pm.b2 = 0.0;
                    p.relationship.b3 = 0.0;
                }
                VariantKind::DirectDistressEffect => {
                    for c in [&mut p.adherence_am, &mut p.adherence_pm] {
                        c.b3 -= variant.c_treat * c.b1.abs();
                    }
                }
                VariantKind::RandomMediator { sd } => {
                    // + 0.0 folds a -0.0 draw into +0.0
                    p.adherence_am.b2 = sd * std_normal(rng) + 0.0;
                    p.adherence_pm.b2 = sd * std_normal(rng) + 0.0;
                    p.relationship.b3 = sd * std_normal(rng) + 0.0;
                }
            }
            p
        })
        .collect()
}
