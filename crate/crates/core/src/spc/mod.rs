//! Enhanced SPC detection: non-restarting CUSUM, null models, and
//! simulation-based threshold learning.

pub mod cusum;
pub mod null;
pub mod threshold;

pub use cusum::{cusum, CusumConfig, DetectionResult, Direction, ReportingRule};
pub use null::{derive_seed, fit_null, simulate_null, NullKind, NullModel};
pub use threshold::{estimate_far, learn_threshold, trial_grid, CalibrationPlan, ThresholdReport, TrialRate};
