//! Seed plumbing shared by every entry point that builds testbeds.

use crate::env::{calibrate_c_treat, calibrate_population, generate_population, DyadParams, PopulationConfig, SteSettings, Testbed, VariantKind};
use crate::error::Result;
use crate::seed::SeedTree;

/// Synthetic dyads with burden scaling calibrated, derived from `master_seed`.
pub fn base_population(master_seed: u64, size: usize, cfg: &PopulationConfig) -> Result<Vec<DyadParams>> {
    let root = SeedTree::new(master_seed);
    let pop = generate_population(root.named("population").value(), size, cfg)?;
    calibrate_population(&pop, root.named("burden").value())
}

/// `settings` with its seed replaced by the calibration stream of `master_seed`.
pub fn calibration_settings(master_seed: u64, settings: &SteSettings) -> SteSettings {
    SteSettings { seed: SeedTree::new(master_seed).named("calibration").value(), ..*settings }
}

/// Bisects `c_treat` for `target` on `base` under the seeds of `master_seed`.
pub fn calibrated_testbed(base: &[DyadParams], target: f64, kind: VariantKind, settings: &SteSettings, master_seed: u64) -> Result<Testbed> {
    calibrate_c_treat(base, target, kind, &calibration_settings(master_seed, settings))
}
