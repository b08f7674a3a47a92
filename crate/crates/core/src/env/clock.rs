//! Decision-time indexing: 14 weeks x 7 days x 2 windows.

use serde::{Deserialize, Serialize};
use std::fmt;

pub const WEEKS: u8 = 14;
pub const DAYS: u8 = 7;
pub const SLOTS: u8 = 2;
/// Decision times per dyad.
pub const HORIZON: usize = WEEKS as usize * DAYS as usize * SLOTS as usize;
pub const DAYS_TOTAL: usize = WEEKS as usize * DAYS as usize;

/// Position of a decision time `(week, day, slot)`, all 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClockIndex {
    week: u8,
    day: u8,
    slot: u8,
}

/// What kind of decision the clock position calls for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecisionKind {
    /// First slot of the first day: AYA, carepartner and relationship actions.
    WeekStart,
    /// First slot of a later day: AYA and carepartner actions.
    DayStart,
    /// Evening slot: AYA action only.
    Evening,
}

impl DecisionKind {
    pub fn index(self) -> usize {
        match self {
            DecisionKind::WeekStart => 0,
            DecisionKind::DayStart => 1,
            DecisionKind::Evening => 2,
        }
    }

    /// Number of binary action components decided at this kind of time.
    pub fn n_components(self) -> usize {
        3 - self.index()
    }
}

impl ClockIndex {
    pub const FIRST: ClockIndex = ClockIndex { week: 1, day: 1, slot: 1 };
    pub const LAST: ClockIndex = ClockIndex { week: WEEKS, day: DAYS, slot: SLOTS };

    pub fn new(week: u8, day: u8, slot: u8) -> Option<Self> {
        let ok = (1..=WEEKS).contains(&week) && (1..=DAYS).contains(&day) && (1..=SLOTS).contains(&slot);
        ok.then_some(ClockIndex { week, day, slot })
    }

    /// Clock position of the `i`-th decision time (0-based).
    pub fn from_index(i: usize) -> Option<Self> {
        if i >= HORIZON {
            return None;
        }
        let slot = (i % 2) as u8 + 1;
        let day = ((i / 2) % 7) as u8 + 1;
        let week = (i / 14) as u8 + 1;
        Some(ClockIndex { week, day, slot })
    }

    pub fn index(self) -> usize {
        (self.week as usize - 1) * 14 + (self.day as usize - 1) * 2 + (self.slot as usize - 1)
    }

    /// 0-based day counter across the whole trial.
    pub fn day_index(self) -> usize {
        (self.week as usize - 1) * 7 + (self.day as usize - 1)
    }

    pub fn week(self) -> u8 {
        self.week
    }

    pub fn day(self) -> u8 {
        self.day
    }

    pub fn slot(self) -> u8 {
        self.slot
    }

    /// Decision-window indicator: 0 in the morning, 1 in the evening.
    pub fn window(self) -> u8 {
        self.slot - 1
    }

    pub fn is_day_start(self) -> bool {
        self.slot == 1
    }

    pub fn is_week_start(self) -> bool {
        self.slot == 1 && self.day == 1
    }

    pub fn is_day_end(self) -> bool {
        self.slot == SLOTS
    }

    pub fn is_week_end(self) -> bool {
        self.slot == SLOTS && self.day == DAYS
    }

    pub fn kind(self) -> DecisionKind {
        if self.is_week_start() {
            DecisionKind::WeekStart
        } else if self.is_day_start() {
            DecisionKind::DayStart
        } else {
            DecisionKind::Evening
        }
    }

    pub fn succ(self) -> Option<Self> {
        Self::from_index(self.index() + 1)
    }

    pub fn pred(self) -> Option<Self> {
        self.index().checked_sub(1).and_then(Self::from_index)
    }

    pub fn all() -> impl Iterator<Item = ClockIndex> {
        (0..HORIZON).filter_map(ClockIndex::from_index)
    }
}

impl fmt::Display for ClockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(w{}, d{}, {})", self.week, self.day, if self.slot == 1 { "AM" } else { "PM" })
    }
}
