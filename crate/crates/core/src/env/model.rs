//! Per-dyad coefficients and the transition models they drive.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Logistic adherence model for one decision window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AdherenceCoeffs {
    pub b0: f64,
    /// Previous adherence.
    pub b1: f64,
    /// Previous week's relationship quality (mediator).
    pub b2: f64,
    /// Yesterday's carepartner distress.
    pub b3: f64,
    /// Main burden effect, zero by construction.
    pub b4: f64,
    pub tau0: f64,
    /// Intervention x relationship quality.
    pub tau1: f64,
    /// Intervention x burden.
    pub tau2: f64,
}

/// Linear carepartner distress model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistressCoeffs {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub tau0: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub noise_sd: f64,
}

impl Default for DistressCoeffs {
    fn default() -> Self {
        DistressCoeffs { b0: 0.0, b1: 0.0, b2: 0.0, b3: 0.0, b4: 0.0, tau0: 0.0, tau1: 0.0, tau2: 0.0, noise_sd: 1.0 }
    }
}

/// Logistic weekly relationship-quality model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RelationshipCoeffs {
    pub b0: f64,
    pub b1: f64,
    /// Weighted adherence of the week.
    pub b2: f64,
    /// Weighted distress of the week (mediator).
    pub b3: f64,
    pub tau0: f64,
    /// Game x total burden.
    pub tau1: f64,
}

/// Autoregressive app-burden model on the raw (unstandardized) scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurdenCoeffs {
    /// Intercept, persistence, own-intervention load, game load.
    pub theta: [f64; 4],
    pub noise_sd: f64,
}

impl BurdenCoeffs {
    pub fn aya_default() -> Self {
        BurdenCoeffs { theta: [0.2, 13.0 / 14.0, 1.0, 0.2], noise_sd: 2.4 }
    }

    pub fn care_default() -> Self {
        BurdenCoeffs { theta: [0.2, 6.0 / 7.0, 1.0, 0.2], noise_sd: 2.4 }
    }

    /// One raw transition, truncated at zero. `eta` is a standard-normal draw.
    #[inline]
    pub fn next_raw(&self, raw: f64, a_own: bool, a_rel: bool, eta: f64) -> f64 {
        let [t0, t1, t2, t3] = self.theta;
        let v = t0 + t1 * raw + t2 * f64::from(a_own as u8) + t3 * f64::from(a_rel as u8) + self.noise_sd * eta;
        v.max(0.0)
    }
}

/// Standardization statistics of raw burden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurdenScaling {
    pub mean_aya: f64,
    pub sd_aya: f64,
    pub mean_care: f64,
    pub sd_care: f64,
}

impl Default for BurdenScaling {
    fn default() -> Self {
        BurdenScaling { mean_aya: 0.0, sd_aya: 1.0, mean_care: 0.0, sd_care: 1.0 }
    }
}

impl BurdenScaling {
    #[inline]
    pub fn standardize(&self, role: Role, raw: f64) -> f64 {
        match role {
            Role::Aya => (raw - self.mean_aya) / self.sd_aya,
            Role::Care => (raw - self.mean_care) / self.sd_care,
        }
    }

    pub fn mean(&self, role: Role) -> f64 {
        match role {
            Role::Aya => self.mean_aya,
            Role::Care => self.mean_care,
        }
    }
}

/// Which member of the dyad a burden model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Aya,
    Care,
}

/// Every coefficient defining one dyad's environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadParams {
    pub adherence_am: AdherenceCoeffs,
    pub adherence_pm: AdherenceCoeffs,
    pub distress: DistressCoeffs,
    pub relationship: RelationshipCoeffs,
    pub burden_aya: BurdenCoeffs,
    pub burden_care: BurdenCoeffs,
    pub burden_scaling: BurdenScaling,
    /// Scales adherence `b2` and relationship `b3`.
    pub mediator_multiplier: f64,
    /// Discount of the within-week weighted mediator sums.
    pub mediator_discount: f64,
}

impl Default for DyadParams {
    fn default() -> Self {
        DyadParams {
            adherence_am: AdherenceCoeffs::default(),
            adherence_pm: AdherenceCoeffs::default(),
            distress: DistressCoeffs::default(),
            relationship: RelationshipCoeffs::default(),
            burden_aya: BurdenCoeffs::aya_default(),
            burden_care: BurdenCoeffs::care_default(),
            burden_scaling: BurdenScaling::default(),
            mediator_multiplier: 1.0,
            mediator_discount: 0.9,
        }
    }
}

impl DyadParams {
    pub fn adherence(&self, window: u8) -> &AdherenceCoeffs {
        if window == 0 {
            &self.adherence_am
        } else {
            &self.adherence_pm
        }
    }

    pub fn burden(&self, role: Role) -> &BurdenCoeffs {
        match role {
            Role::Aya => &self.burden_aya,
            Role::Care => &self.burden_care,
        }
    }

    /// Truncation rules every dyad must satisfy.
    pub fn satisfies_truncation(&self) -> bool {
        let adh = |c: &AdherenceCoeffs| c.b2 >= 0.0 && c.b3 <= 0.0;
        adh(&self.adherence_am) && adh(&self.adherence_pm) && self.relationship.b3 <= 0.0
    }

    /// True when every treatment-effect coefficient is zero.
    pub fn tau_is_zero(&self) -> bool {
        let a = |c: &AdherenceCoeffs| c.tau0 == 0.0 && c.tau1 == 0.0 && c.tau2 == 0.0;
        a(&self.adherence_am)
            && a(&self.adherence_pm)
            && self.distress.tau0 == 0.0
            && self.distress.tau1 == 0.0
            && self.distress.tau2 == 0.0
            && self.relationship.tau0 == 0.0
            && self.relationship.tau1 == 0.0
    }

    /// Applies the sign truncations to the mediator and distress coefficients.
    pub fn truncate(&mut self) {
        for c in [&mut self.adherence_am, &mut self.adherence_pm] {
            c.b2 = c.b2.max(0.0);
            c.b3 = c.b3.min(0.0);
        }
        self.relationship.b3 = self.relationship.b3.min(0.0);
    }
}

/// Inputs of the adherence model at one decision time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdherenceInputs {
    pub last_adherence: bool,
    pub rel_prev: bool,
    pub last_distress: f64,
    pub b_aya: f64,
}

/// Probability of adherence given the window's coefficients.
#[inline]
pub fn adherence_prob(coeffs: &AdherenceCoeffs, x: &AdherenceInputs, a_aya: bool, mediator_multiplier: f64) -> f64 {
    let r = f64::from(x.last_adherence as u8);
    let y = f64::from(x.rel_prev as u8);
    let a = f64::from(a_aya as u8);
    let logit = coeffs.b0
        + coeffs.b1 * r
        + mediator_multiplier * coeffs.b2 * y
        + coeffs.b3 * x.last_distress
        + coeffs.b4 * x.b_aya
        + a * (coeffs.tau0 + coeffs.tau1 * y + coeffs.tau2 * x.b_aya);
    sigmoid(logit)
}

/// Inputs of the distress model at a day start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistressInputs {
    pub last_distress: f64,
    pub last_adherence: bool,
    pub rel_prev: bool,
    pub b_care: f64,
}

/// Next distress value; `eps` is a standard-normal draw scaled by the noise sd.
#[inline]
pub fn distress_next(coeffs: &DistressCoeffs, x: &DistressInputs, a_care: bool, eps: f64) -> f64 {
    let r = f64::from(x.last_adherence as u8);
    let y = f64::from(x.rel_prev as u8);
    let a = f64::from(a_care as u8);
    coeffs.b0
        + coeffs.b1 * x.last_distress
        + coeffs.b2 * r
        + coeffs.b3 * y
        + coeffs.b4 * x.b_care
        + a * (coeffs.tau0 + coeffs.tau1 * y + coeffs.tau2 * x.b_care)
        + coeffs.noise_sd * eps
}

/// Discounted within-week sum with the most recent entry weighted `gamma^0`.
pub fn discounted_sum<I>(values: I, gamma: f64) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: DoubleEndedIterator,
{
    let mut w = 1.0;
    let mut acc = 0.0;
    for v in values.into_iter().rev() {
        acc += w * v;
        w *= gamma;
    }
    acc
}

/// Weekly mediator summaries `(rbar_aya, rbar_care)`.
pub fn week_mediators(adherence: &[u8], distress: &[f64], gamma: f64) -> (f64, f64) {
    (
        discounted_sum(adherence.iter().map(|&r| f64::from(r)), gamma),
        discounted_sum(distress.iter().copied(), gamma),
    )
}

/// Inputs of the end-of-week relationship model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationshipInputs {
    pub rel_prev: bool,
    pub rbar_aya: f64,
    pub rbar_care: f64,
    pub b_aya: f64,
    pub b_care: f64,
}

#[inline]
pub fn relationship_prob(coeffs: &RelationshipCoeffs, x: &RelationshipInputs, a_rel: bool, mediator_multiplier: f64) -> f64 {
    let y = f64::from(x.rel_prev as u8);
    let a = f64::from(a_rel as u8);
    let logit = coeffs.b0
        + coeffs.b1 * y
        + coeffs.b2 * x.rbar_aya
        + mediator_multiplier * coeffs.b3 * x.rbar_care
        + a * (coeffs.tau0 + coeffs.tau1 * (x.b_care + x.b_aya));
    sigmoid(logit)
}

/// Draws one standard-normal variate.
#[inline]
pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
