//! Two-sided CUSUM over a normalized series.
//!
//! `U(t) = max(0, U(t−1) + z(t) − k)` and `D(t) = min(0, D(t−1) + z(t) + k)`.
//! In the default non-restarting form the statistics are never reset, so a
//! crossing is only read off the trajectory and never feeds back into it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::NormalizedSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReportingRule {
    /// Flag at the first period whose statistic crosses its threshold.
    AnyPoint,
    /// Flag only if the final-period statistic exceeds its threshold.
    EndOfWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "UP")]
    Up,
    #[serde(rename = "DOWN")]
    Down,
    /// No flagged change.
    #[serde(rename = "NONE")]
    Flat,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "UP",
            Direction::Down => "DOWN",
            Direction::Flat => "NONE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "UP" => Some(Direction::Up),
            "DOWN" => Some(Direction::Down),
            "NONE" => Some(Direction::Flat),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Flat => Direction::Flat,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CusumConfig {
    /// Allowance, in z units.
    pub k: f64,
    pub h_high: f64,
    /// Applied to the magnitude of the downward statistic.
    pub h_low: f64,
    pub reporting_rule: ReportingRule,
    /// Clamp a statistic back to zero after it crosses.
    #[serde(default)]
    pub auto_reset: bool,
}

impl CusumConfig {
    pub fn new(k: f64, h_high: f64, h_low: f64, reporting_rule: ReportingRule) -> Self {
        CusumConfig {
            k,
            h_high,
            h_low,
            reporting_rule,
            auto_reset: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0) || !(self.h_high > 0.0) || !(self.h_low > 0.0) {
            return Err(Error::invalid(format!(
                "cusum needs k >= 0 and positive thresholds (k={}, h_high={}, h_low={})",
                self.k, self.h_high, self.h_low
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    /// 0-based index of the first crossing, per direction.
    pub first_crossing_up: Option<usize>,
    pub first_crossing_down: Option<usize>,
    pub flagged_up: bool,
    pub flagged_down: bool,
    pub direction: Direction,
}

impl DetectionResult {
    pub fn final_upper(&self) -> f64 {
        self.upper.last().copied().unwrap_or(0.0)
    }

    pub fn final_lower(&self) -> f64 {
        self.lower.last().copied().unwrap_or(0.0)
    }
}

/// Runs the two-sided CUSUM. Missing values leave both statistics unchanged.
pub fn cusum(series: &NormalizedSeries, config: &CusumConfig) -> Result<DetectionResult> {
    config.validate()?;
    if series.values.iter().all(Option::is_none) {
        return Err(Error::invalid("cusum needs at least one non-missing value"));
    }
    let n = series.len();
    let mut upper = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    let (mut u, mut d) = (0.0f64, 0.0f64);
    let (mut first_up, mut first_down) = (None, None);
    let (mut any_up, mut any_down) = (false, false);
    for (t, z) in series.values.iter().enumerate() {
        if let Some(z) = *z {
            u = (u + z - config.k).max(0.0);
            d = (d + z + config.k).min(0.0);
        }
        if u > config.h_high {
            any_up = true;
            first_up.get_or_insert(t);
            if config.auto_reset {
                u = 0.0;
            }
        }
        if d < -config.h_low {
            any_down = true;
            first_down.get_or_insert(t);
            if config.auto_reset {
                d = 0.0;
            }
        }
        upper.push(u);
        lower.push(d);
    }
    let (flagged_up, flagged_down) = match (config.reporting_rule, config.auto_reset) {
        (ReportingRule::AnyPoint, _) | (ReportingRule::EndOfWindow, true) => (any_up, any_down),
        (ReportingRule::EndOfWindow, false) => (u > config.h_high, d < -config.h_low),
    };
    let direction = match (flagged_up, flagged_down) {
        (true, false) => Direction::Up,
        (false, true) => Direction::Down,
        (true, true) if u > -d => Direction::Up,
        (true, true) if -d > u => Direction::Down,
        _ => Direction::Flat,
    };
    Ok(DetectionResult {
        upper,
        lower,
        first_crossing_up: first_up,
        first_crossing_down: first_down,
        flagged_up,
        flagged_down,
        direction,
    })
}
