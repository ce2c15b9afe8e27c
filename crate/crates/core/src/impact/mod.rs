//! EWA impact of change and its decomposition into unit price, utilization,
//! and the intensity, participation and prevalence factors of utilization.

mod decompose;
mod ewa;

pub use decompose::{
    decompose_price_utilization, decompose_utilization, impact_total, ImpactBreakdown, PriceUtilization,
    UtilizationSplit,
};
pub use ewa::{ewa, ewa_masked, yoy_differences, ImpactConfig, Observation};
