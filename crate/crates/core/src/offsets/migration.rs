use serde::{Deserialize, Serialize};

use super::network::OffsetNetwork;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub from: usize,
    pub to: usize,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MigrationFlows {
    /// Total migrated volume.
    pub total: f64,
    /// Offset outflow per originator.
    pub outflows: Vec<f64>,
    /// Offset inflow per receiver.
    pub inflows: Vec<f64>,
    pub flows: Vec<Flow>,
}

/// Solves for the largest migration consistent with proportional allocation.
///
/// With `SR_i` the receiver capacity reachable from originator `i`, the total
/// is `P = min(Σo, Σo / Σ_i (o_i / SR_i))`. Originator `i` sends
/// `P·o_i/Σo`, split over its receivers in proportion to their capacities.
pub fn compute_migration(net: &OffsetNetwork) -> Result<MigrationFlows> {
    net.validate()?;
    let o: Vec<f64> = net.originators.iter().map(|n| n.capacity).collect();
    let sr: Vec<f64> = (0..o.len()).map(|i| net.reachable_capacity(i)).collect();
    if let Some(i) = sr.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::invalid(format!(
            "originator {} reaches no receiver capacity",
            net.originators[i].treatment
        )));
    }
    let sum_o: f64 = o.iter().sum();
    let load: f64 = o.iter().zip(&sr).map(|(o, sr)| o / sr).sum();
    let total = sum_o.min(sum_o / load);
    let outflows: Vec<f64> = o.iter().map(|oi| total * oi / sum_o).collect();
    let mut inflows = vec![0.0; net.receivers.len()];
    let mut flows = Vec::new();
    for (i, reach) in net.reach.iter().enumerate() {
        for &j in reach {
            let volume = outflows[i] * net.receivers[j].capacity / sr[i];
            inflows[j] += volume;
            flows.push(Flow { from: i, to: j, volume });
        }
    }
    Ok(MigrationFlows {
        total,
        outflows,
        inflows,
        flows,
    })
}

/// Cost of the migrated volume per member-month at lagged unit prices:
/// `(Σ_j r_mj·a_j − Σ_i o_mi·a_i) / member_months`.
pub fn offset_cost_impact(net: &OffsetNetwork, flows: &MigrationFlows, member_months: f64) -> Result<f64> {
    if !(member_months > 0.0) {
        return Err(Error::invalid(format!("member-months {member_months} must be positive")));
    }
    if flows.outflows.len() != net.originators.len() || flows.inflows.len() != net.receivers.len() {
        return Err(Error::invalid("migration flows do not match the network"));
    }
    let price = |n: &super::OffsetNode| {
        n.lagged_price
            .filter(|p| p.is_finite())
            .ok_or_else(|| Error::invalid(format!("no lagged unit price for treatment {}", n.treatment)))
    };
    let mut gained = 0.0;
    for (n, r) in net.receivers.iter().zip(&flows.inflows) {
        gained += r * price(n)?;
    }
    let mut lost = 0.0;
    for (n, o) in net.originators.iter().zip(&flows.outflows) {
        lost += o * price(n)?;
    }
    Ok((gained - lost) / member_months)
}
