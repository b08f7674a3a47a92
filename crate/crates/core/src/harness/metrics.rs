//! Improvement curves over the dyad index.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::trial::RunMetrics;
use crate::env::HORIZON;
use crate::error::{contract, Result};

/// How the cumulative difference after `k` dyads is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Total adherence difference summed over the first `k` dyads.
    Summed,
    /// The summed difference divided by `k`.
    PerDyad,
}

impl Aggregation {
    pub fn label(&self) -> &'static str {
        match self {
            Aggregation::Summed => "summed",
            Aggregation::PerDyad => "per_dyad",
        }
    }
}

/// Pointwise mean and sample standard deviation across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementCurve {
    pub aggregation: Aggregation,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub n_runs: usize,
}

impl ImprovementCurve {
    /// Standard error of the last point.
    pub fn final_se(&self) -> f64 {
        self.sd.last().map_or(f64::NAN, |s| s / (self.n_runs as f64).sqrt())
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(f64::NAN)
    }

    /// Writes `dyad_index,mean_improvement,sd,n_runs` rows, dyad index from 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "dyad_index,mean_improvement,sd,n_runs")?;
        for (k, (m, s)) in self.mean.iter().zip(&self.sd).enumerate() {
            writeln!(w, "{},{},{},{}", k + 1, m, s, self.n_runs)?;
        }
        Ok(())
    }
}

/// Per-run difference of cumulative adherence against a paired baseline.
fn differences(runs: &RunMetrics, baseline: &RunMetrics, aggregation: Aggregation) -> Result<Vec<Vec<f64>>> {
    if runs.runs.len() != baseline.runs.len() {
        return Err(contract(format!("{} runs against {} baseline runs", runs.runs.len(), baseline.runs.len())));
    }
    if runs.n_dyads() != baseline.n_dyads() {
        return Err(contract(format!("{} dyads against {} baseline dyads", runs.n_dyads(), baseline.n_dyads())));
    }
    runs.runs
        .iter()
        .zip(&baseline.runs)
        .map(|(a, b)| {
            if a.dyads != b.dyads {
                return Err(contract("baseline run met a different dyad sequence"));
            }
            Ok(a.cumulative()
                .iter()
                .zip(b.cumulative())
                .enumerate()
                .map(|(k, (&x, y))| {
                    let d = f64::from(x) - f64::from(y);
                    match aggregation {
                        Aggregation::Summed => d,
                        Aggregation::PerDyad => d / (k + 1) as f64,
                    }
                })
                .collect())
        })
        .collect()
}

/// Mean and sample standard deviation (divisor `n - 1`, zero for one run) of
/// the cumulative improvement over the paired baseline at every dyad index.
pub fn cumulative_improvement(runs: &RunMetrics, baseline: &RunMetrics, aggregation: Aggregation) -> Result<ImprovementCurve> {
    let diffs = differences(runs, baseline, aggregation)?;
    let n = diffs.len();
    let len = runs.n_dyads();
    if n == 0 {
        return Ok(ImprovementCurve { aggregation, mean: vec![f64::NAN; len], sd: vec![f64::NAN; len], n_runs: 0 });
    }
    let mut mean = vec![0.0; len];
    let mut sd = vec![0.0; len];
    for k in 0..len {
        let m = diffs.iter().map(|d| d[k]).sum::<f64>() / n as f64;
        mean[k] = m;
        if n > 1 {
            sd[k] = (diffs.iter().map(|d| (d[k] - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        }
    }
    Ok(ImprovementCurve { aggregation, mean, sd, n_runs: n })
}

/// End-of-trial comparison of one algorithm against its paired baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Mean adherence gain per dyad over the whole trial.
    pub improvement: f64,
    pub se: f64,
    /// Mean adherence per dyad under the baseline.
    pub baseline_per_dyad: f64,
    /// `improvement / baseline_per_dyad`.
    pub relative: f64,
    /// Improvement as a fraction of the horizon (adherence-rate points).
    pub absolute_rate: f64,
}

pub fn summarize(runs: &RunMetrics, baseline: &RunMetrics) -> Result<Summary> {
    let curve = cumulative_improvement(runs, baseline, Aggregation::PerDyad)?;
    let baseline_per_dyad = baseline.adherence_rate() * HORIZON as f64;
    let improvement = curve.final_mean();
    Ok(Summary {
        improvement,
        se: curve.final_se(),
        baseline_per_dyad,
        relative: improvement / baseline_per_dyad,
        absolute_rate: improvement / HORIZON as f64,
    })
}

/// Standard error of a difference of two independent estimates.
pub fn pooled_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trial::{Algorithm, RunRecord, TrialConfig};
    use proptest::prelude::*;

    fn metrics(runs: Vec<Vec<u32>>) -> RunMetrics {
        let n = runs[0].len();
        let mut cfg = TrialConfig::new(Algorithm::UniformRandom, 0.5);
        cfg.n_dyads = n;
        cfg.n_runs = runs.len();
        let runs = runs
            .into_iter()
            .map(|totals| {
                let mut adherence = vec![0u8; n * HORIZON];
                for (k, t) in totals.iter().enumerate() {
                    adherence[k * HORIZON..k * HORIZON + *t as usize].fill(1);
                }
                RunRecord { dyads: vec![0; n], adherence }
            })
            .collect();
        RunMetrics { config: cfg, ste: 0.5, runs }
    }

    #[test]
    fn identical_runs_give_zero_curve() {
        let a = metrics(vec![vec![3, 5, 9], vec![100, 0, 7]]);
        let c = cumulative_improvement(&a, &a, Aggregation::Summed).unwrap();
        assert_eq!(c.mean, vec![0.0; 3]);
        assert_eq!(c.sd, vec![0.0; 3]);
    }

    #[test]
    fn two_constant_differences() {
        // Run 1 gains 2 per dyad, run 2 gains 6 per dyad.
        let base = metrics(vec![vec![10, 10], vec![10, 10]]);
        let alg = metrics(vec![vec![12, 12], vec![16, 16]]);
        let c = cumulative_improvement(&alg, &base, Aggregation::PerDyad).unwrap();
        assert_eq!(c.mean, vec![4.0, 4.0]);
        let expect = (6.0f64 - 2.0).abs() / 2f64.sqrt();
        for s in &c.sd {
            assert!((s - expect).abs() < 1e-12);
        }
        let c = cumulative_improvement(&alg, &base, Aggregation::Summed).unwrap();
        assert_eq!(c.mean, vec![4.0, 8.0]);
    }

    #[test]
    fn curve_has_one_point_per_dyad_with_running_sums() {
        let base = metrics(vec![vec![1; 25]]);
        let alg = metrics(vec![(0..25).collect()]);
        let c = cumulative_improvement(&alg, &base, Aggregation::Summed).unwrap();
        assert_eq!(c.mean.len(), 25);
        for k in 0..25 {
            let expect: i64 = (0..=k as i64).map(|j| j - 1).sum();
            assert_eq!(c.mean[k], expect as f64);
        }
    }

    #[test]
    fn mismatched_lengths_are_contract_errors() {
        let a = metrics(vec![vec![1, 2], vec![1, 2]]);
        let b = metrics(vec![vec![1, 2]]);
        assert!(matches!(cumulative_improvement(&a, &b, Aggregation::Summed), Err(crate::Error::Contract(_))));
        let c = metrics(vec![vec![1, 2, 3], vec![1, 2, 3]]);
        assert!(cumulative_improvement(&a, &c, Aggregation::Summed).is_err());
        let mut d = a.clone();
        d.runs[0].dyads[1] = 4;
        assert!(cumulative_improvement(&a, &d, Aggregation::Summed).is_err());
    }

    #[test]
    fn csv_layout() {
        let base = metrics(vec![vec![1, 1], vec![1, 1]]);
        let alg = metrics(vec![vec![2, 1], vec![1, 3]]);
        let c = cumulative_improvement(&alg, &base, Aggregation::Summed).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "dyad_index,mean_improvement,sd,n_runs\n1,0.5,0.7071067811865476,2\n2,1.5,0.7071067811865476,2\n");
    }

    proptest! {
        #[test]
        fn aggregation_is_permutation_invariant(
            rows in prop::collection::vec(prop::collection::vec(0u32..=196, 4), 2..8),
            base in prop::collection::vec(prop::collection::vec(0u32..=196, 4), 8),
            shift in 0usize..8,
        ) {
            let n = rows.len();
            let b = metrics(base[..n].to_vec());
            let a = metrics(rows.clone());
            let c1 = cumulative_improvement(&a, &b, Aggregation::PerDyad).unwrap();
            let mut rot_a = rows.clone();
            let mut rot_b = base[..n].to_vec();
            rot_a.rotate_left(shift % n);
            rot_b.rotate_left(shift % n);
            let c2 = cumulative_improvement(&metrics(rot_a), &metrics(rot_b), Aggregation::PerDyad).unwrap();
            for k in 0..4 {
                prop_assert!((c1.mean[k] - c2.mean[k]).abs() < 1e-9);
                prop_assert!((c1.sd[k] - c2.sd[k]).abs() < 1e-9);
                prop_assert!(c1.sd[k] >= 0.0);
            }
        }

        #[test]
        fn cumulative_sums_are_nondecreasing_and_bounded(totals in prop::collection::vec(0u32..=196, 1..30)) {
            let m = metrics(vec![totals.clone()]);
            let c = m.runs[0].cumulative();
            prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(*c.last().unwrap() as usize <= HORIZON * totals.len());
            prop_assert_eq!(c.len(), totals.len());
        }
    }
}
