use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::Month;

/// An analysis window: `horizon_months` ending at `end_month`, split into
/// periods of `resolution_months`, anchored backward from the end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub id: String,
    pub horizon_months: u32,
    pub resolution_months: u32,
    pub end_month: Month,
}

impl WindowSpec {
    pub fn new(id: &str, horizon_months: u32, resolution_months: u32, end_month: Month) -> Result<Self> {
        let w = WindowSpec {
            id: id.to_string(),
            horizon_months,
            resolution_months,
            end_month,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.resolution_months;
        if r == 0 || 12 % r != 0 {
            return Err(Error::invalid(format!("window {}: resolution {r} must divide 12", self.id)));
        }
        if !self.horizon_months.is_multiple_of(r) {
            return Err(Error::invalid(format!(
                "window {}: horizon {} not divisible by resolution {r}",
                self.id, self.horizon_months
            )));
        }
        if self.horizon_months < 24 {
            return Err(Error::invalid(format!(
                "window {}: horizon {} shorter than two years",
                self.id, self.horizon_months
            )));
        }
        Ok(())
    }

    /// P, the number of periods.
    pub fn periods(&self) -> usize {
        (self.horizon_months / self.resolution_months) as usize
    }

    /// T, periods per year.
    pub fn periods_per_year(&self) -> usize {
        (12 / self.resolution_months) as usize
    }

    pub fn start_month(&self) -> Month {
        self.end_month.offset(1 - self.horizon_months as i32)
    }

    pub fn contains(&self, month: Month) -> bool {
        month >= self.start_month() && month <= self.end_month
    }

    /// 0-based period index of `month`, if inside the window.
    pub fn period_of(&self, month: Month) -> Option<usize> {
        self.contains(month)
            .then(|| (self.start_month().months_until(month) as u32 / self.resolution_months) as usize)
    }

    /// First and last month of 0-based period `p`.
    pub fn period_bounds(&self, p: usize) -> (Month, Month) {
        let first = self.start_month().offset((p as u32 * self.resolution_months) as i32);
        (first, first.offset(self.resolution_months as i32 - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_backward_from_end() {
        let w = WindowSpec::new("short", 24, 3, "2016-12".parse().unwrap()).unwrap();
        assert_eq!(w.periods(), 8);
        assert_eq!(w.periods_per_year(), 4);
        assert_eq!(w.start_month().to_string(), "2015-01");
        let (a, b) = w.period_bounds(7);
        assert_eq!((a.to_string(), b.to_string()), ("2016-10".into(), "2016-12".into()));
        assert_eq!(w.period_of("2015-04".parse().unwrap()), Some(1));
        assert_eq!(w.period_of("2014-12".parse().unwrap()), None);
    }

    #[test]
    fn invariants() {
        let end: Month = "2016-12".parse().unwrap();
        assert!(WindowSpec::new("x", 12, 3, end).is_err());
        assert!(WindowSpec::new("x", 25, 5, end).is_err());
        assert!(WindowSpec::new("x", 30, 4, end).is_err());
        assert!(WindowSpec::new("x", 60, 6, end).is_ok());
    }
}
