use serde::{Deserialize, Serialize};

use super::clock::{ClockIndex, DecisionKind};
use crate::error::{contract, Result};

/// Binary decisions valid at one clock position.
///
/// `a_care` is present exactly at day starts and `a_rel` exactly at week starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionBundle {
    pub a_aya: bool,
    pub a_care: Option<bool>,
    pub a_rel: Option<bool>,
}

impl ActionBundle {
    pub fn evening(a_aya: bool) -> Self {
        ActionBundle { a_aya, a_care: None, a_rel: None }
    }

    pub fn day_start(a_aya: bool, a_care: bool) -> Self {
        ActionBundle { a_aya, a_care: Some(a_care), a_rel: None }
    }

    pub fn week_start(a_aya: bool, a_care: bool, a_rel: bool) -> Self {
        ActionBundle { a_aya, a_care: Some(a_care), a_rel: Some(a_rel) }
    }

    /// Builds the bundle for `clock` from a full joint action, dropping
    /// components that the clock position does not consume.
    pub fn gated(clock: ClockIndex, a_aya: bool, a_care: bool, a_rel: bool) -> Self {
        match clock.kind() {
            DecisionKind::WeekStart => Self::week_start(a_aya, a_care, a_rel),
            DecisionKind::DayStart => Self::day_start(a_aya, a_care),
            DecisionKind::Evening => Self::evening(a_aya),
        }
    }

    /// All-zero bundle for `clock`.
    pub fn none(clock: ClockIndex) -> Self {
        Self::gated(clock, false, false, false)
    }

    pub fn n_components(&self) -> usize {
        1 + self.a_care.is_some() as usize + self.a_rel.is_some() as usize
    }

    pub fn validate(&self, clock: ClockIndex) -> Result<()> {
        let care_ok = self.a_care.is_some() == clock.is_day_start();
        let rel_ok = self.a_rel.is_some() == clock.is_week_start();
        if care_ok && rel_ok {
            Ok(())
        } else {
            Err(contract(format!(
                "action bundle {self:?} is inconsistent with decision time {clock}"
            )))
        }
    }
}
