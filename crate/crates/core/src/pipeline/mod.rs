//! Batch orchestration: generate or ingest, aggregate, detect, decompose,
//! find offsets and rank drivers, with every stage persisted as delimited
//! text in the output directory.

pub mod config;
mod plots;
pub mod stages;
pub mod tables;

pub use config::{
    DetectConfig, ImpactSettings, NullChoice, OffsetSettings, OffsetUnit, PipelineConfig, RankBy, ReportScope,
    ReportSettings, TrialGrid, WindowConfig, WindowRole,
};
pub use stages::{build_report, run_pipeline, run_stage, Stage};
pub use tables::{read_table, write_table, DetectionRow, DriverRow, ImpactRow, OffsetRecord, OffsetRow, PanelRow, Table, ThresholdRow};
