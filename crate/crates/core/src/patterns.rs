//! Rule-based profiling of short- and long-window detection outcomes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::spc::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PatternLabel {
    EmergingGrowth,
    EmergingDecline,
    PersistentGrowth,
    PersistentDecline,
    StabilizingGrowth,
    StabilizingDecline,
    NoChange,
    Mixed,
}

impl PatternLabel {
    pub const ALL: [PatternLabel; 8] = [
        PatternLabel::EmergingGrowth,
        PatternLabel::EmergingDecline,
        PatternLabel::PersistentGrowth,
        PatternLabel::PersistentDecline,
        PatternLabel::StabilizingGrowth,
        PatternLabel::StabilizingDecline,
        PatternLabel::NoChange,
        PatternLabel::Mixed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternLabel::EmergingGrowth => "EMERGING_GROWTH",
            PatternLabel::EmergingDecline => "EMERGING_DECLINE",
            PatternLabel::PersistentGrowth => "PERSISTENT_GROWTH",
            PatternLabel::PersistentDecline => "PERSISTENT_DECLINE",
            PatternLabel::StabilizingGrowth => "STABILIZING_GROWTH",
            PatternLabel::StabilizingDecline => "STABILIZING_DECLINE",
            PatternLabel::NoChange => "NO_CHANGE",
            PatternLabel::Mixed => "MIXED",
        }
    }

    /// Human-readable name, e.g. "Emerging growth".
    pub fn title(self) -> &'static str {
        match self {
            PatternLabel::EmergingGrowth => "Emerging growth",
            PatternLabel::EmergingDecline => "Emerging decline",
            PatternLabel::PersistentGrowth => "Persistent growth",
            PatternLabel::PersistentDecline => "Persistent decline",
            PatternLabel::StabilizingGrowth => "Stabilizing growth",
            PatternLabel::StabilizingDecline => "Stabilizing decline",
            PatternLabel::NoChange => "No change",
            PatternLabel::Mixed => "Mixed",
        }
    }

    /// The label obtained by exchanging growth and decline.
    pub fn mirrored(self) -> Self {
        use PatternLabel::*;
        match self {
            EmergingGrowth => EmergingDecline,
            EmergingDecline => EmergingGrowth,
            PersistentGrowth => PersistentDecline,
            PersistentDecline => PersistentGrowth,
            StabilizingGrowth => StabilizingDecline,
            StabilizingDecline => StabilizingGrowth,
            NoChange => NoChange,
            Mixed => Mixed,
        }
    }
}

impl fmt::Display for PatternLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatternLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PatternLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown pattern label {s:?}")))
    }
}

/// Labels a drill path from its short-window and long-window directions.
pub fn characterize(short: Direction, long: Direction) -> PatternLabel {
    use Direction::*;
    match (short, long) {
        (Up, Flat) => PatternLabel::EmergingGrowth,
        (Down, Flat) => PatternLabel::EmergingDecline,
        (Up, Up) => PatternLabel::PersistentGrowth,
        (Down, Down) => PatternLabel::PersistentDecline,
        (Flat, Up) => PatternLabel::StabilizingGrowth,
        (Flat, Down) => PatternLabel::StabilizingDecline,
        (Flat, Flat) => PatternLabel::NoChange,
        (Up, Down) | (Down, Up) => PatternLabel::Mixed,
    }
}
