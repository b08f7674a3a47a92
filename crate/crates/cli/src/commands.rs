//! Subcommand bodies. Each returns its artifacts without touching the disk.

use std::fmt::Write as _;

use dyad_core::env::io::write_population;
use dyad_core::env::{DyadParams, Testbed, VariantKind};
use dyad_core::harness::{
    ablation_suite, base_population, best_probability, calibrated_testbed, collaboration_experiment, fixed_prob_sweep, AblationCell,
    AblationReport, AblationSettings, Component,
};
use dyad_core::{Result, SeedTree};

use crate::config::ExperimentConfig;
use crate::output::{Outputs, TestbedRecord};

fn base(cfg: &ExperimentConfig) -> Result<Vec<DyadParams>> {
    base_population(cfg.seed, cfg.population_size, &cfg.population)
}

fn testbed(cfg: &ExperimentConfig, base: &[DyadParams], target: f64, kind: VariantKind, out: &mut Outputs) -> Result<Testbed> {
    let t = calibrated_testbed(base, target, kind, &cfg.calibration.settings(), cfg.seed)?;
    log::info!("{} STE {target}: c_treat {:.4}, STE {:.4}", kind.label(), t.c_treat, t.ste);
    out.testbeds.push(TestbedRecord { variant: kind.label().into(), ste_target: target, c_treat: t.c_treat, ste: t.ste });
    Ok(t)
}

fn population_csv(pop: &[DyadParams]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_population(&mut buf, pop)?;
    Ok(buf)
}

pub fn calibrate(cfg: &ExperimentConfig) -> Result<Outputs> {
    let mut out = Outputs::default();
    let base = base(cfg)?;
    let kind = cfg.trial.variant;
    let mut summary = String::from("variant,ste_target,c_treat,ste\n");
    for &target in &cfg.calibration.targets {
        let t = testbed(cfg, &base, target, kind, &mut out)?;
        writeln!(summary, "{},{target},{},{}", kind.label(), t.c_treat, t.ste).unwrap();
        out.add(format!("population_{}_ste{target}.csv", kind.label()), population_csv(&t.population)?);
    }
    out.add("calibration.csv", summary.into_bytes());
    Ok(out)
}

fn report_outputs(report: &AblationReport, out: &mut Outputs) {
    let mut summary = String::from(
        "variant,ste_target,ste,algorithm,n_runs,improvement_per_dyad,se,baseline_per_dyad,relative,surrogate_matches_naive\n",
    );
    for cell in &report.cells {
        for r in &cell.results {
            let name = format!("curve_{}_{}_ste{}", r.algorithm.label(), cell.variant.label(), cell.ste_target);
            for (suffix, curve) in [("", &r.per_dyad), ("_summed", &r.summed)] {
                let mut buf = Vec::new();
                curve.write_csv(&mut buf).expect("writing to memory");
                out.add(format!("{name}{suffix}.csv"), buf);
            }
            let s = &r.summary;
            let matches = cell.surrogate_matches_naive.map_or(String::new(), |b| b.to_string());
            writeln!(
                summary,
                "{},{},{},{},{},{},{},{},{},{}",
                cell.variant.label(),
                cell.ste_target,
                cell.ste,
                r.algorithm.label(),
                r.per_dyad.n_runs,
                s.improvement,
                s.se,
                s.baseline_per_dyad,
                s.relative,
                matches
            )
            .unwrap();
        }
    }
    out.add("summary.csv", summary.into_bytes());
}

fn grid(cfg: &ExperimentConfig, variants: &[VariantKind]) -> Result<Outputs> {
    let mut out = Outputs::default();
    let base = base(cfg)?;
    let mut beds = Vec::new();
    for &kind in variants {
        for &target in &cfg.calibration.targets {
            beds.push((target, testbed(cfg, &base, target, kind, &mut out)?));
        }
    }
    let cells: Vec<AblationCell> = beds.iter().map(|(t, b)| AblationCell { ste_target: *t, testbed: b }).collect();
    let settings = AblationSettings { n_runs: cfg.trial.n_runs, n_dyads: cfg.trial.n_dyads, rlsvi: cfg.trial.rlsvi, seed: cfg.seed };
    let report = ablation_suite(&cells, &cfg.trial.algorithms, &settings)?;
    report_outputs(&report, &mut out);
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outputs> {
    grid(cfg, &[cfg.trial.variant])
}

pub fn ablate(cfg: &ExperimentConfig) -> Result<Outputs> {
    grid(cfg, &cfg.ablation.variants)
}

pub fn collaborate(cfg: &ExperimentConfig) -> Result<Outputs> {
    let mut out = Outputs::default();
    let c = &cfg.collaboration;
    let base = base(cfg)?;
    let t = testbed(cfg, &base, c.ste_target, VariantKind::Vanilla, &mut out)?;
    let root = SeedTree::new(cfg.seed).named("collaboration");
    let mut rates = String::from("trained,varied,p_varied,replicate,rate,decisions\n");
    for (trained, varied) in [(Component::Rel, Component::Aya), (Component::Care, Component::Rel)] {
        for &p in &c.probs {
            for r in 0..c.replicates {
                // Replicate seeds do not depend on `p`, so settings are compared on paired streams.
                let seed = root.named(trained.label()).child(r as u64).value();
                let x = collaboration_experiment(&t, trained, c.fixed(varied, p), c.n_dyads, cfg.trial.rlsvi, seed)?;
                writeln!(rates, "{},{},{p},{r},{},{}", trained.label(), varied.label(), x.rate, x.decisions).unwrap();
            }
        }
    }
    out.add("collaboration.csv", rates.into_bytes());
    let mut sweep = String::from("p_aya,p_rel,mean,se,best\n");
    for &p in &c.probs {
        let pts = fixed_prob_sweep(&t.population, c.fixed(Component::Aya, p), Component::Rel, &c.sweep_grid, c.sweep_rollouts, root.named("sweep").value())?;
        let best = best_probability(&pts);
        for x in pts {
            writeln!(sweep, "{p},{},{},{},{}", x.p, x.mean, x.se, Some(x.p) == best).unwrap();
        }
    }
    out.add("sweep.csv", sweep.into_bytes());
    Ok(out)
}

pub fn export_population(cfg: &ExperimentConfig) -> Result<Outputs> {
    let mut out = Outputs::default();
    out.add("population.csv", population_csv(&base(cfg)?)?);
    Ok(out)
}
