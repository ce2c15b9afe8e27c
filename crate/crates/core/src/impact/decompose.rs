use serde::{Deserialize, Serialize};

use super::ewa::{ewa_masked, yoy_differences, ImpactConfig, Observation};
use crate::error::Result;

/// EWA of the year-over-year differences of cost per enrollee. `None` when
/// no period has both years present.
pub fn impact_total<O: Observation>(s: &[O], config: &ImpactConfig) -> Result<Option<f64>> {
    config.validate()?;
    config.check_len("s", s.len())?;
    ewa_masked(&yoy_differences(s, config.periods_per_year), config.w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceUtilization {
    pub total: f64,
    pub price: f64,
    pub utilization: f64,
    /// `J(c1) + J(c2) - I(c)` before redistribution.
    pub delta1: f64,
    pub j_price: f64,
    pub j_utilization: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilizationSplit {
    pub intensity: f64,
    pub participation: f64,
    pub prevalence: f64,
    /// Sum of the three raw EWA terms minus the utilization impact.
    pub delta2: f64,
}

/// Subtracts `delta` from the raw terms in proportion to their magnitudes,
/// or in equal parts when every term is zero.
fn distribute(raw: &[f64], delta: f64) -> Vec<f64> {
    let mass: f64 = raw.iter().map(|j| j.abs()).sum();
    raw.iter()
        .map(|&j| {
            if mass > 0.0 {
                j - delta * j.abs() / mass
            } else {
                j - delta / raw.len() as f64
            }
        })
        .collect()
}

/// Both years of a factor, borrowing the other year's value when one is
/// missing so that its difference vanishes. Missing factors only occur where
/// their co-factor is zero, so the borrowed value never changes a product
/// that matters.
fn pair<O: Observation>(x: &[O], t: usize, lag: usize) -> (f64, f64) {
    match (x[t].get(), x[lag].get()) {
        (Some(now), Some(then)) => (now, then),
        (Some(v), None) | (None, Some(v)) => (v, v),
        (None, None) => (0.0, 0.0),
    }
}

/// Splits the total impact into a unit-price part and a utilization part.
///
/// `c1(t) = e(t-T)[a(t) - a(t-T)]` and `c2(t) = [e(t) - e(t-T)] a(t-T)`; the
/// residual against the total is shared out by magnitude. A period enters
/// when `s` and `e` are present in both years.
pub fn decompose_price_utilization<O: Observation>(
    s: &[O],
    a: &[O],
    e: &[O],
    config: &ImpactConfig,
) -> Result<Option<PriceUtilization>> {
    config.validate()?;
    config.check_len("s", s.len())?;
    config.check_len("a", a.len())?;
    config.check_len("e", e.len())?;
    let big_t = config.periods_per_year;
    let mut c = Vec::with_capacity(config.periods - big_t);
    let mut c1 = Vec::with_capacity(c.capacity());
    let mut c2 = Vec::with_capacity(c.capacity());
    for t in big_t..config.periods {
        let lag = t - big_t;
        let present = [s[t], s[lag], e[t], e[lag]].iter().all(|x| x.get().is_some());
        if !present {
            c.push(None);
            c1.push(None);
            c2.push(None);
            continue;
        }
        let (a_now, a_then) = pair(a, t, lag);
        let (e_now, e_then) = (e[t].get().unwrap(), e[lag].get().unwrap());
        c.push(Some(s[t].get().unwrap() - s[lag].get().unwrap()));
        c1.push(Some(e_then * (a_now - a_then)));
        c2.push(Some((e_now - e_then) * a_then));
    }
    let Some(total) = ewa_masked(&c, config.w)? else {
        return Ok(None);
    };
    let j1 = ewa_masked(&c1, config.w)?.unwrap_or(0.0);
    let j2 = ewa_masked(&c2, config.w)?.unwrap_or(0.0);
    let delta1 = j1 + j2 - total;
    let parts = distribute(&[j1, j2], delta1);
    Ok(Some(PriceUtilization {
        total,
        price: parts[0],
        utilization: parts[1],
        delta1,
        j_price: j1,
        j_utilization: j2,
    }))
}

/// Splits the utilization impact into intensity, participation and
/// prevalence parts. Each raw term changes one factor between years while
/// holding the other two and the unit price at their lagged values. A period
/// enters when `v` is present in both years.
pub fn decompose_utilization<O: Observation>(
    i: &[O],
    p: &[O],
    v: &[O],
    a: &[O],
    utilization: f64,
    config: &ImpactConfig,
) -> Result<Option<UtilizationSplit>> {
    config.validate()?;
    for (name, x) in [("i", i), ("p", p), ("v", v), ("a", a)] {
        config.check_len(name, x.len())?;
    }
    let big_t = config.periods_per_year;
    let mut terms: [Vec<Option<f64>>; 3] = Default::default();
    for t in big_t..config.periods {
        let lag = t - big_t;
        if v[t].get().is_none() || v[lag].get().is_none() {
            terms.iter_mut().for_each(|c| c.push(None));
            continue;
        }
        let (i1, i0) = pair(i, t, lag);
        let (p1, p0) = pair(p, t, lag);
        let (v1, v0) = pair(v, t, lag);
        let (_, a0) = pair(a, t, lag);
        terms[0].push(Some((i1 - i0) * p0 * v0 * a0));
        terms[1].push(Some((p1 - p0) * i0 * v0 * a0));
        terms[2].push(Some((v1 - v0) * i0 * p0 * a0));
    }
    if terms[0].iter().all(Option::is_none) {
        return Ok(None);
    }
    let mut raw = [0.0; 3];
    for (r, c) in raw.iter_mut().zip(&terms) {
        *r = ewa_masked(c, config.w)?.unwrap_or(0.0);
    }
    let delta2 = raw.iter().sum::<f64>() - utilization;
    let parts = distribute(&raw, delta2);
    Ok(Some(UtilizationSplit {
        intensity: parts[0],
        participation: parts[1],
        prevalence: parts[2],
        delta2,
    }))
}

/// Both decomposition levels for one KPI panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactBreakdown {
    pub total: f64,
    pub price: f64,
    pub utilization: f64,
    pub delta1: f64,
    pub intensity: f64,
    pub participation: f64,
    pub prevalence: f64,
    pub delta2: f64,
}

impl ImpactBreakdown {
    /// Decomposes from the six KPI series `s, a, e, i, p, v`.
    #[allow(clippy::too_many_arguments)]
    pub fn compute<O: Observation>(
        s: &[O],
        a: &[O],
        e: &[O],
        i: &[O],
        p: &[O],
        v: &[O],
        config: &ImpactConfig,
    ) -> Result<Option<Self>> {
        let Some(pu) = decompose_price_utilization(s, a, e, config)? else {
            return Ok(None);
        };
        let split = decompose_utilization(i, p, v, a, pu.utilization, config)?.unwrap_or(UtilizationSplit {
            intensity: 0.0,
            participation: 0.0,
            prevalence: pu.utilization,
            delta2: -pu.utilization,
        });
        Ok(Some(ImpactBreakdown {
            total: pu.total,
            price: pu.price,
            utilization: pu.utilization,
            delta1: pu.delta1,
            intensity: split.intensity,
            participation: split.participation,
            prevalence: split.prevalence,
            delta2: split.delta2,
        }))
    }

    /// The four leaf components in report order.
    pub fn components(&self) -> [(&'static str, f64); 4] {
        [
            ("price", self.price),
            ("intensity", self.intensity),
            ("participation", self.participation),
            ("prevalence", self.prevalence),
        ]
    }

    /// Leaf component with the largest magnitude and its magnitude as a
    /// share of `|total|`. The share is `None` when the total is zero.
    pub fn dominant(&self) -> (&'static str, Option<f64>) {
        let (name, value) = self
            .components()
            .into_iter()
            .fold(("price", 0.0_f64), |best, c| if c.1.abs() > best.1.abs() { c } else { best });
        let share = (self.total != 0.0).then(|| value.abs() / self.total.abs());
        (name, share)
    }
}
