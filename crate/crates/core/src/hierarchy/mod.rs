//! Viewpoint drill paths and multi-resolution KPI aggregation.

pub mod normalize;
pub mod panel;
pub mod path;
pub mod se;
pub mod window;

pub use normalize::{yoy_normalize, NormalizedSeries};
pub use panel::{aggregate, Aggregator, Estimate, KpiKind, KpiPanel, PeriodKpis};
pub use path::{enumerate_paths, is_ancestor, Attribute, DrillPath, Segment, SegmentValue, ViewpointSpec, OTHER};
pub use window::WindowSpec;

#[cfg(test)]
mod tests;
