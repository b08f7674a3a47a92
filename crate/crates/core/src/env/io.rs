//! Versioned columnar text format for populations: a version line, a header of
//! coefficient symbols, then one comma-separated row per dyad.

use std::io::{BufRead, Write};

use super::model::DyadParams;
use crate::error::{Error, Result};

pub const POPULATION_FORMAT: &str = "# dyad-population v1";

type Get = fn(&DyadParams) -> f64;
type Set = fn(&mut DyadParams, f64);

macro_rules! col {
    ($name:literal, $($path:tt)+) => {
        ($name, (|p: &DyadParams| p.$($path)+) as Get, (|p: &mut DyadParams, v: f64| p.$($path)+ = v) as Set)
    };
}

fn columns() -> [(&'static str, Get, Set); 47] {
    [
        col!("adh_am_b0", adherence_am.b0),
        col!("adh_am_b1", adherence_am.b1),
        col!("adh_am_b2", adherence_am.b2),
        col!("adh_am_b3", adherence_am.b3),
        col!("adh_am_b4", adherence_am.b4),
        col!("adh_am_tau0", adherence_am.tau0),
        col!("adh_am_tau1", adherence_am.tau1),
        col!("adh_am_tau2", adherence_am.tau2),
        col!("adh_pm_b0", adherence_pm.b0),
        col!("adh_pm_b1", adherence_pm.b1),
        col!("adh_pm_b2", adherence_pm.b2),
        col!("adh_pm_b3", adherence_pm.b3),
        col!("adh_pm_b4", adherence_pm.b4),
        col!("adh_pm_tau0", adherence_pm.tau0),
        col!("adh_pm_tau1", adherence_pm.tau1),
        col!("adh_pm_tau2", adherence_pm.tau2),
        col!("dis_b0", distress.b0),
        col!("dis_b1", distress.b1),
        col!("dis_b2", distress.b2),
        col!("dis_b3", distress.b3),
        col!("dis_b4", distress.b4),
        col!("dis_tau0", distress.tau0),
        col!("dis_tau1", distress.tau1),
        col!("dis_tau2", distress.tau2),
        col!("dis_sigma", distress.noise_sd),
        col!("rel_b0", relationship.b0),
        col!("rel_b1", relationship.b1),
        col!("rel_b2", relationship.b2),
        col!("rel_b3", relationship.b3),
        col!("rel_tau0", relationship.tau0),
        col!("rel_tau1", relationship.tau1),
        col!("bur_aya_theta0", burden_aya.theta[0]),
        col!("bur_aya_theta1", burden_aya.theta[1]),
        col!("bur_aya_theta2", burden_aya.theta[2]),
        col!("bur_aya_theta3", burden_aya.theta[3]),
        col!("bur_aya_omega", burden_aya.noise_sd),
        col!("bur_care_theta0", burden_care.theta[0]),
        col!("bur_care_theta1", burden_care.theta[1]),
        col!("bur_care_theta2", burden_care.theta[2]),
        col!("bur_care_theta3", burden_care.theta[3]),
        col!("bur_care_omega", burden_care.noise_sd),
        col!("scale_mean_aya", burden_scaling.mean_aya),
        col!("scale_sd_aya", burden_scaling.sd_aya),
        col!("scale_mean_care", burden_scaling.mean_care),
        col!("scale_sd_care", burden_scaling.sd_care),
        col!("mediator_multiplier", mediator_multiplier),
        col!("mediator_discount", mediator_discount),
    ]
}

/// Writes a population; values use the shortest representation that round-trips.
pub fn write_population<W: Write>(mut w: W, population: &[DyadParams]) -> Result<()> {
    let cols = columns();
    writeln!(w, "{POPULATION_FORMAT}")?;
    let header: Vec<&str> = cols.iter().map(|c| c.0).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in population {
        let row: Vec<String> = cols.iter().map(|c| format!("{:?}", (c.1)(p))).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_population<R: BufRead>(r: R) -> Result<Vec<DyadParams>> {
    let mut lines = r.lines();
    let version = lines.next().transpose()?.unwrap_or_default();
    if version.trim() != POPULATION_FORMAT {
        return Err(Error::Parse(format!("unsupported population format line {version:?}")));
    }
    let header = lines.next().transpose()?.ok_or_else(|| Error::Parse("missing header".into()))?;
    let cols = columns();
    let mut setters = Vec::new();
    for name in header.trim().split(',') {
        let c = cols
            .iter()
            .find(|c| c.0 == name)
            .ok_or_else(|| Error::Parse(format!("unknown column {name:?}")))?;
        setters.push(c.2);
    }
    if setters.len() != cols.len() {
        return Err(Error::Parse(format!("expected {} columns, found {}", cols.len(), setters.len())));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut p = DyadParams::default();
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != setters.len() {
            return Err(Error::Parse(format!("row {}: expected {} fields, found {}", i + 1, setters.len(), fields.len())));
        }
        for (f, set) in fields.iter().zip(&setters) {
            let v: f64 = f.parse().map_err(|_| Error::Parse(format!("row {}: bad number {f:?}", i + 1)))?;
            set(&mut p, v);
        }
        out.push(p);
    }
    Ok(out)
}
