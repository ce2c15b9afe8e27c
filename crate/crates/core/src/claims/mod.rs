//! Input data model: claim and enrollment records, file codecs, the episode
//! grouper, and the synthetic scenario generator.

pub mod episodes;
pub mod io;
pub mod model;
pub mod synthetic;

pub use episodes::{assign_episodes, EpisodeLabel, EpisodeRule, EpisodeRules, LabeledClaims, UNGROUPED};
pub use io::{parse_claims, parse_enrollment, write_claims, write_enrollment, Format};
pub use model::{ClaimRecord, ClaimType, EnrollmentRecord};
pub use synthetic::{
    generate_synthetic, CellRates, ConditionRates, GroundTruth, Injection, InjectionShape, OffsetScript,
    RateComponent, SyntheticData, SyntheticScenario, TreatmentRates,
};
