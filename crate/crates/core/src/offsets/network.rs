use serde::{Deserialize, Serialize};

use super::kb::{Basis, ComparabilityKb};
use crate::error::{Error, Result};
use crate::spc::Direction;

/// Utilization evidence for one treatment in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentSignal {
    /// Drill path the evidence was measured on.
    pub path: String,
    pub condition: String,
    pub treatment: String,
    /// Detected utilization direction.
    pub direction: Direction,
    /// Signed EWA of year-over-year utilization change, in volume units.
    pub change: f64,
    /// Unit price one year before the analysis period.
    pub lagged_price: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetNode {
    pub treatment: String,
    pub path: String,
    pub capacity: f64,
    pub lagged_price: Option<f64>,
}

impl OffsetNode {
    pub fn new(treatment: &str, capacity: f64) -> Self {
        OffsetNode {
            treatment: treatment.to_string(),
            path: String::new(),
            capacity,
            lagged_price: None,
        }
    }

    pub fn priced(mut self, price: f64) -> Self {
        self.lagged_price = Some(price);
        self
    }
}

/// Bipartite network of treatments losing (originators) and gaining
/// (receivers) utilization. `reach[i]` lists the receivers originator `i`
/// may send volume to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetNetwork {
    pub id: String,
    pub window: String,
    pub condition: String,
    pub basis: Option<Basis>,
    pub originators: Vec<OffsetNode>,
    pub receivers: Vec<OffsetNode>,
    pub reach: Vec<Vec<usize>>,
}

impl OffsetNetwork {
    /// A network with every originator connected to every receiver.
    pub fn complete(originators: Vec<OffsetNode>, receivers: Vec<OffsetNode>) -> Result<Self> {
        let all: Vec<usize> = (0..receivers.len()).collect();
        let reach = vec![all; originators.len()];
        Self::with_reach(originators, receivers, reach)
    }

    pub fn with_reach(originators: Vec<OffsetNode>, receivers: Vec<OffsetNode>, reach: Vec<Vec<usize>>) -> Result<Self> {
        let net = OffsetNetwork {
            id: String::new(),
            window: String::new(),
            condition: String::new(),
            basis: None,
            originators,
            receivers,
            reach,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.originators.is_empty() || self.receivers.is_empty() {
            return Err(Error::invalid("offset network needs an originator and a receiver"));
        }
        if self.reach.len() != self.originators.len() {
            return Err(Error::invalid("offset network reach list does not match originators"));
        }
        for n in self.originators.iter().chain(&self.receivers) {
            if !(n.capacity > 0.0) || !n.capacity.is_finite() {
                return Err(Error::invalid(format!(
                    "treatment {} has non-positive capacity {}",
                    n.treatment, n.capacity
                )));
            }
        }
        for (i, r) in self.reach.iter().enumerate() {
            if r.is_empty() {
                return Err(Error::invalid(format!(
                    "originator {} has no receiver",
                    self.originators[i].treatment
                )));
            }
            if r.iter().any(|&j| j >= self.receivers.len()) || r.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("reach lists must be sorted receiver indices"));
            }
        }
        Ok(())
    }

    /// Sum of receiver capacities reachable from originator `i`.
    pub fn reachable_capacity(&self, i: usize) -> f64 {
        self.reach[i].iter().map(|&j| self.receivers[j].capacity).sum()
    }
}

/// Builds one network per comparable group whose members moved in opposite
/// directions in `window`.
///
/// A member is matched by condition and treatment name; when several signals
/// match, the first in input order is used. Signals whose direction disagrees
/// with the sign of their change, or whose change is zero, are ignored.
pub fn identify_offsets(signals: &[TreatmentSignal], kb: &ComparabilityKb, window: &str) -> Vec<OffsetNetwork> {
    let mut out = Vec::new();
    for (g, group) in kb.groups.iter().enumerate() {
        let mut originators = Vec::new();
        let mut receivers = Vec::new();
        for member in &group.members {
            let Some(sig) = signals
                .iter()
                .find(|s| s.condition == group.condition && &s.treatment == member)
            else {
                continue;
            };
            let coherent = match sig.direction {
                Direction::Up => sig.change > 0.0,
                Direction::Down => sig.change < 0.0,
                Direction::Flat => false,
            };
            if !coherent || !sig.change.is_finite() {
                continue;
            }
            let node = OffsetNode {
                treatment: member.clone(),
                path: sig.path.clone(),
                capacity: sig.change.abs(),
                lagged_price: sig.lagged_price,
            };
            if sig.direction == Direction::Up {
                receivers.push(node);
            } else {
                originators.push(node);
            }
        }
        let mut reach: Vec<Vec<usize>> = originators
            .iter()
            .map(|o| {
                receivers
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| group.allows(&o.treatment, &r.treatment))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        // Drop nodes left without edges, then re-index receivers.
        let keep: Vec<bool> = reach.iter().map(|r| !r.is_empty()).collect();
        let mut k = keep.iter();
        originators.retain(|_| *k.next().unwrap());
        reach.retain(|r| !r.is_empty());
        let used: Vec<bool> = (0..receivers.len()).map(|j| reach.iter().any(|r| r.contains(&j))).collect();
        let mut new_index = vec![usize::MAX; receivers.len()];
        let mut next = 0;
        for (j, &u) in used.iter().enumerate() {
            if u {
                new_index[j] = next;
                next += 1;
            }
        }
        let mut u = used.iter();
        receivers.retain(|_| *u.next().unwrap());
        for r in &mut reach {
            for j in r.iter_mut() {
                *j = new_index[*j];
            }
        }
        if originators.is_empty() || receivers.is_empty() {
            continue;
        }
        out.push(OffsetNetwork {
            id: format!("{window}:{}:{g}", group.condition),
            window: window.to_string(),
            condition: group.condition.clone(),
            basis: Some(group.basis),
            originators,
            receivers,
            reach,
        });
    }
    out
}
