use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A period value that may be missing. Non-finite floats count as missing.
pub trait Observation: Copy {
    fn get(self) -> Option<f64>;
}

impl Observation for f64 {
    fn get(self) -> Option<f64> {
        self.is_finite().then_some(self)
    }
}

impl Observation for Option<f64> {
    fn get(self) -> Option<f64> {
        self.filter(|v| v.is_finite())
    }
}

impl<O: Observation> Observation for &O {
    fn get(self) -> Option<f64> {
        (*self).get()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactConfig {
    /// EWA decay weight; recent periods weigh more as `w` shrinks.
    pub w: f64,
    /// Periods per year (`T`).
    pub periods_per_year: usize,
    /// Total periods in the window (`P`).
    pub periods: usize,
}

impl ImpactConfig {
    pub fn new(w: f64, periods_per_year: usize, periods: usize) -> Result<Self> {
        let c = ImpactConfig {
            w,
            periods_per_year,
            periods,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_w(self.w)?;
        if self.periods_per_year == 0 {
            return Err(Error::invalid("periods per year must be at least 1"));
        }
        if self.periods <= self.periods_per_year {
            return Err(Error::invalid(format!(
                "impact needs more than one year of periods: P={} T={}",
                self.periods, self.periods_per_year
            )));
        }
        Ok(())
    }

    pub(crate) fn check_len(&self, name: &str, len: usize) -> Result<()> {
        if len != self.periods {
            return Err(Error::invalid(format!(
                "series {name} has {len} periods, config expects {}",
                self.periods
            )));
        }
        Ok(())
    }
}

fn check_w(w: f64) -> Result<()> {
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::invalid(format!("EWA weight {w} must lie in (0, 1)")));
    }
    Ok(())
}

/// Exponentially weighted average of `c(T+1..P)`; the last value is `c(P)`
/// and carries weight proportional to `w^0`.
pub fn ewa(values: &[f64], w: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("EWA of an empty series"));
    }
    check_w(w)?;
    let n = values.len();
    let norm = (1.0 - w) / (1.0 - w.powi(n as i32));
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(k, c)| w.powi((n - 1 - k) as i32) * c)
        .sum();
    Ok(norm * sum)
}

/// EWA that drops missing terms and renormalizes the remaining weights.
/// Returns `None` when every term is missing.
pub fn ewa_masked<O: Observation>(values: &[O], w: f64) -> Result<Option<f64>> {
    if values.is_empty() {
        return Err(Error::invalid("EWA of an empty series"));
    }
    check_w(w)?;
    let n = values.len();
    let (mut num, mut den) = (0.0, 0.0);
    for (k, c) in values.iter().enumerate() {
        if let Some(c) = c.get() {
            let wt = w.powi((n - 1 - k) as i32);
            num += wt * c;
            den += wt;
        }
    }
    Ok((den > 0.0).then(|| num / den))
}

/// `c(t) = x(t) - x(t-T)` for `t = T+1..P`; missing if either side is.
pub fn yoy_differences<O: Observation>(x: &[O], periods_per_year: usize) -> Vec<Option<f64>> {
    (periods_per_year..x.len())
        .map(|t| Some(x[t].get()? - x[t - periods_per_year].get()?))
        .collect()
}
