//! Delta-method standard errors for the KPI ratios.
//!
//! Count ratios treat numerator and denominator as independent Poisson
//! counts. Per-enrollee cost and quantity rates use the empirical variance of
//! per-enrollee totals, where enrollees without claims contribute zeros.

use super::panel::Estimate;

/// Per-claimant totals within one period.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClaimantTotal {
    pub cost: f64,
    pub quantity: f64,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// `n / d` for independent Poisson counts: var = n/d² + n²/d³.
pub fn count_ratio(n: f64, d: f64) -> Estimate {
    match ratio(n, d) {
        Some(v) => Estimate::new(v, (n / (d * d) + n * n / (d * d * d)).sqrt()),
        None => Estimate::MISSING,
    }
}

/// Mean of per-enrollee totals over `d` enrollees, of which only claimants
/// appear in `sum_sq`: var = (Σx² − d·v²) / d².
fn sum_over_count(sum: f64, sum_sq: f64, d: f64) -> Estimate {
    match ratio(sum, d) {
        Some(v) => Estimate::new(v, ((sum_sq - d * v * v).max(0.0) / (d * d)).sqrt()),
        None => Estimate::MISSING,
    }
}

pub fn cost_per_enrollee(totals: &[ClaimantTotal], cost: f64, enrollees: f64) -> Estimate {
    let sq: f64 = totals.iter().map(|t| t.cost * t.cost).sum();
    sum_over_count(cost, sq, enrollees)
}

pub fn utilization(totals: &[ClaimantTotal], quantity: f64, enrollees: f64) -> Estimate {
    let sq: f64 = totals.iter().map(|t| t.quantity * t.quantity).sum();
    sum_over_count(quantity, sq, enrollees)
}

/// Ratio of two sums over the same claimants, linearized:
/// var(a) = Σ (cost_j − a·qty_j)² / Q².
pub fn unit_price(totals: &[ClaimantTotal], cost: f64, quantity: f64) -> Estimate {
    match ratio(cost, quantity) {
        Some(a) => {
            let resid: f64 = totals.iter().map(|t| (t.cost - a * t.quantity).powi(2)).sum();
            Estimate::new(a, resid.max(0.0).sqrt() / quantity)
        }
        None => Estimate::MISSING,
    }
}

/// Mean quantity per claimant, var(i) = Σ (qty_j − i)² / K².
pub fn intensity(totals: &[ClaimantTotal], quantity: f64) -> Estimate {
    let k = totals.len() as f64;
    match ratio(quantity, k) {
        Some(i) => {
            let resid: f64 = totals.iter().map(|t| (t.quantity - i).powi(2)).sum();
            Estimate::new(i, resid.sqrt() / k)
        }
        None => Estimate::MISSING,
    }
}
