use super::panel::{KpiKind, KpiPanel};
use crate::error::{Error, Result};

/// Year-over-year changes divided by their standard error, for periods
/// `T+1..=P`. Missing entries are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub values: Vec<Option<f64>>,
    pub periods_per_year: usize,
    pub periods: usize,
}

impl NormalizedSeries {
    /// A complete series with no calendar attached (e.g. a simulated null).
    pub fn from_values(values: Vec<f64>) -> Self {
        let periods = values.len();
        NormalizedSeries {
            values: values.into_iter().map(Some).collect(),
            periods_per_year: 0,
            periods,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn present(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }
}

/// `z(t) = [k(t) − k(t−T)] / sqrt(se(t)² + se(t−T)²)`.
pub fn yoy_normalize(panel: &KpiPanel, kpi: KpiKind) -> Result<NormalizedSeries> {
    let t_year = panel.periods_per_year;
    let p = panel.periods.len();
    if p <= t_year {
        return Err(Error::invalid(format!(
            "{}: {p} periods do not cover a year-over-year lag of {t_year}",
            panel.path
        )));
    }
    let values = (t_year..p)
        .map(|t| {
            let now = panel.periods[t].kpi(kpi);
            let then = panel.periods[t - t_year].kpi(kpi);
            let (Some(k1), Some(s1), Some(k0), Some(s0)) = (now.value, now.se, then.value, then.se) else {
                return None;
            };
            let se = (s1 * s1 + s0 * s0).sqrt();
            (se > 0.0 && se.is_finite()).then(|| (k1 - k0) / se)
        })
        .collect();
    Ok(NormalizedSeries {
        values,
        periods_per_year: t_year,
        periods: p,
    })
}
