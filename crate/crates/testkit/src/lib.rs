//! Reference oracles and fixture builders for the costdriver test suites.
//!
//! Everything here is a direct transcription of the defining formulas and
//! deliberately shares no code with the `costdriver` crate, so agreement
//! between the two is evidence rather than tautology. Speed is not a goal.

pub mod corpus;
pub mod fixtures;
pub mod migration;
pub mod reference;

pub use corpus::{parse_corpus, OracleCase, Provenance};
pub use fixtures::{diabetes_offsets, offset_impact_by_definition, trulicity_panel, OffsetFixture, TrulicityPanel, TRULICITY_TARGETS};
pub use migration::{brute_force_migration, proportional_flows_feasible};
pub use reference::{cusum_recurrence, decomposition_by_definition, ewa_direct, RefBreakdown};
