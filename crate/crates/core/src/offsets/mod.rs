//! Utilization offsets among comparable treatments: network identification,
//! migration flows under proportional allocation, and cost impact.

mod kb;
mod migration;
mod network;

pub use kb::{Basis, ComparabilityKb, ComparableGroup};
pub use migration::{compute_migration, offset_cost_impact, Flow, MigrationFlows};
pub use network::{identify_offsets, OffsetNetwork, OffsetNode, TreatmentSignal};
