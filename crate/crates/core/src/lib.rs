//! Detection, decomposition, and ranking of emerging cost drivers in
//! hierarchical claims data.
//!
//! The crate is organised as a chain of stages:
//!
//! * [`claims`] parses claim and enrollment files, assigns episode labels,
//!   and generates seeded synthetic scenarios with known ground truth.
//! * [`hierarchy`] enumerates viewpoint drill paths and aggregates
//!   multi-resolution KPI panels with standard errors.
//! * [`spc`] runs non-restarting CUSUMs on normalized year-over-year
//!   changes, with thresholds learned by Monte Carlo simulation.
//! * [`impact`] computes exponentially weighted impacts of change and splits
//!   them into price, intensity, participation, and prevalence.
//! * [`patterns`] labels short/long window outcomes as change patterns.
//! * [`offsets`] finds offsetting treatments and solves the proportional
//!   migration flows between them.
//! * [`pipeline`] wires everything into a deterministic batch job.

// Validation uses `!(x >= 0.0)` style checks on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod claims;
pub mod error;
pub mod hierarchy;
pub mod impact;
pub mod month;
pub mod offsets;
pub mod patterns;
pub mod pipeline;
pub mod spc;

pub use error::{Error, Result};
pub use month::Month;
