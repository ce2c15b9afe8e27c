//! Delimited intermediate artifacts. Every table has a fixed header, which
//! is written even when the table has no rows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::{Estimate, KpiKind, KpiPanel, PeriodKpis};
use crate::month::Month;
use crate::spc::Direction;

pub const PANELS: &str = "panels.csv";
pub const DETECTIONS: &str = "detections.csv";
pub const THRESHOLDS: &str = "thresholds.csv";
pub const IMPACTS: &str = "impacts.csv";
pub const OFFSETS: &str = "offsets.csv";
pub const DRIVERS: &str = "drivers.csv";

pub trait Table: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

pub fn write_table<T: Table>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    w.write_record(T::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

pub fn read_table<T: Table>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != T::HEADER {
        return Err(Error::invalid(format!(
            "{}: unexpected header, expected {}",
            path.display(),
            T::HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (n, rec) in r.deserialize().enumerate() {
        out.push(rec.map_err(|e| Error::parse(n as u64 + 2, "row", format!("{}: {e}", path.display())))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub window: String,
    pub path: String,
    /// Condition segment value, empty when the path has none.
    pub condition: String,
    pub leaf_attribute: String,
    pub leaf_value: String,
    pub resolution_months: u32,
    pub periods_per_year: usize,
    pub period: usize,
    pub start: Month,
    pub end: Month,
    pub cost: f64,
    pub quantity: f64,
    pub claimants: u64,
    pub patients: u64,
    pub enrollees: f64,
    pub episodes: u64,
    pub cost_per_enrollee: Option<f64>,
    pub cost_per_enrollee_se: Option<f64>,
    pub unit_price: Option<f64>,
    pub unit_price_se: Option<f64>,
    pub utilization: Option<f64>,
    pub utilization_se: Option<f64>,
    pub intensity: Option<f64>,
    pub intensity_se: Option<f64>,
    pub participation: Option<f64>,
    pub participation_se: Option<f64>,
    pub prevalence: Option<f64>,
    pub prevalence_se: Option<f64>,
}

impl Table for PanelRow {
    const HEADER: &'static [&'static str] = &[
        "window",
        "path",
        "condition",
        "leaf_attribute",
        "leaf_value",
        "resolution_months",
        "periods_per_year",
        "period",
        "start",
        "end",
        "cost",
        "quantity",
        "claimants",
        "patients",
        "enrollees",
        "episodes",
        "cost_per_enrollee",
        "cost_per_enrollee_se",
        "unit_price",
        "unit_price_se",
        "utilization",
        "utilization_se",
        "intensity",
        "intensity_se",
        "participation",
        "participation_se",
        "prevalence",
        "prevalence_se",
    ];
}

/// Identity of a path beyond its rendered key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathInfo {
    pub condition: String,
    pub leaf_attribute: String,
    pub leaf_value: String,
}

pub fn panel_rows(panel: &KpiPanel, info: &PathInfo) -> Vec<PanelRow> {
    panel
        .periods
        .iter()
        .enumerate()
        .map(|(p, k)| {
            let e = |kind: KpiKind| k.kpi(kind);
            PanelRow {
                window: panel.window.clone(),
                path: panel.path.clone(),
                condition: info.condition.clone(),
                leaf_attribute: info.leaf_attribute.clone(),
                leaf_value: info.leaf_value.clone(),
                resolution_months: panel.resolution_months,
                periods_per_year: panel.periods_per_year,
                period: p,
                start: k.start,
                end: k.end,
                cost: k.cost,
                quantity: k.quantity,
                claimants: k.claimants,
                patients: k.patients,
                enrollees: k.enrollees,
                episodes: k.episodes,
                cost_per_enrollee: e(KpiKind::CostPerEnrollee).value,
                cost_per_enrollee_se: e(KpiKind::CostPerEnrollee).se,
                unit_price: e(KpiKind::UnitPrice).value,
                unit_price_se: e(KpiKind::UnitPrice).se,
                utilization: e(KpiKind::Utilization).value,
                utilization_se: e(KpiKind::Utilization).se,
                intensity: e(KpiKind::Intensity).value,
                intensity_se: e(KpiKind::Intensity).se,
                participation: e(KpiKind::Participation).value,
                participation_se: e(KpiKind::Participation).se,
                prevalence: e(KpiKind::Prevalence).value,
                prevalence_se: e(KpiKind::Prevalence).se,
            }
        })
        .collect()
}

/// A panel rebuilt from its rows, with the path's identity.
pub struct StoredPanel {
    pub panel: KpiPanel,
    pub info: PathInfo,
}

/// Groups consecutive rows of one (window, path) back into panels,
/// preserving file order.
pub fn panels_from_rows(rows: &[PanelRow]) -> Result<Vec<StoredPanel>> {
    let mut out: Vec<StoredPanel> = Vec::new();
    for r in rows {
        let est = |v: Option<f64>, se: Option<f64>| Estimate { value: v, se };
        let kpis = PeriodKpis {
            start: r.start,
            end: r.end,
            cost: r.cost,
            quantity: r.quantity,
            claimants: r.claimants,
            patients: r.patients,
            enrollees: r.enrollees,
            episodes: r.episodes,
            estimates: [
                est(r.cost_per_enrollee, r.cost_per_enrollee_se),
                est(r.unit_price, r.unit_price_se),
                est(r.utilization, r.utilization_se),
                est(r.intensity, r.intensity_se),
                est(r.participation, r.participation_se),
                est(r.prevalence, r.prevalence_se),
            ],
        };
        let same = out
            .last()
            .is_some_and(|s| s.panel.window == r.window && s.panel.path == r.path);
        if same {
            let s = out.last_mut().unwrap();
            if r.period != s.panel.periods.len() {
                return Err(Error::invalid(format!("panel {} period {} out of order", r.path, r.period)));
            }
            s.panel.periods.push(kpis);
        } else {
            if r.period != 0 {
                return Err(Error::invalid(format!("panel {} does not start at period 0", r.path)));
            }
            out.push(StoredPanel {
                panel: KpiPanel {
                    path: r.path.clone(),
                    window: r.window.clone(),
                    resolution_months: r.resolution_months,
                    periods_per_year: r.periods_per_year,
                    periods: vec![kpis],
                },
                info: PathInfo {
                    condition: r.condition.clone(),
                    leaf_attribute: r.leaf_attribute.clone(),
                    leaf_value: r.leaf_value.clone(),
                },
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub window: String,
    pub kpi: KpiKind,
    pub side: Direction,
    pub threshold: f64,
    pub far: f64,
    pub n_sims: usize,
    pub seed: u64,
    pub selected: bool,
    pub null_kind: String,
    pub null_sigma: f64,
    pub null_phi: f64,
    pub warning: String,
}

impl Table for ThresholdRow {
    const HEADER: &'static [&'static str] = &[
        "window",
        "kpi",
        "side",
        "threshold",
        "far",
        "n_sims",
        "seed",
        "selected",
        "null_kind",
        "null_sigma",
        "null_phi",
        "warning",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub window: String,
    pub path: String,
    pub kpi: KpiKind,
    pub direction: Direction,
    pub flagged_up: bool,
    pub flagged_down: bool,
    pub first_crossing_up: Option<usize>,
    pub first_crossing_down: Option<usize>,
    pub final_upper: Option<f64>,
    pub final_lower: Option<f64>,
    pub h_high: f64,
    pub h_low: f64,
}

impl Table for DetectionRow {
    const HEADER: &'static [&'static str] = &[
        "window",
        "path",
        "kpi",
        "direction",
        "flagged_up",
        "flagged_down",
        "first_crossing_up",
        "first_crossing_down",
        "final_upper",
        "final_lower",
        "h_high",
        "h_low",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRow {
    pub window: String,
    pub path: String,
    pub total: Option<f64>,
    pub price: Option<f64>,
    pub utilization: Option<f64>,
    pub intensity: Option<f64>,
    pub participation: Option<f64>,
    pub prevalence: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
}

impl Table for ImpactRow {
    const HEADER: &'static [&'static str] = &[
        "window",
        "path",
        "total",
        "price",
        "utilization",
        "intensity",
        "participation",
        "prevalence",
        "delta1",
        "delta2",
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetRecord {
    Network,
    Originator,
    Receiver,
    Flow,
}

/// One line of the offset report. `network` lines carry the migrated total
/// in `volume` and the cost impact; node lines carry capacity, migrated
/// volume and lagged price; `flow` lines carry the edge volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetRow {
    pub network: String,
    pub window: String,
    pub condition: String,
    pub record: OffsetRecord,
    pub from: String,
    pub to: String,
    pub path: String,
    pub capacity: Option<f64>,
    pub volume: f64,
    pub lagged_price: Option<f64>,
    pub impact_pmpm: Option<f64>,
    pub member_months: Option<f64>,
}

impl Table for OffsetRow {
    const HEADER: &'static [&'static str] = &[
        "network",
        "window",
        "condition",
        "record",
        "from",
        "to",
        "path",
        "capacity",
        "volume",
        "lagged_price",
        "impact_pmpm",
        "member_months",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverRow {
    pub rank: usize,
    pub path: String,
    pub pattern: String,
    pub short_direction: Direction,
    pub long_direction: Direction,
    /// Directions of the remaining detection KPIs, `kpi:short/long;...`.
    pub other_directions: String,
    pub total: Option<f64>,
    pub price: Option<f64>,
    pub utilization: Option<f64>,
    pub intensity: Option<f64>,
    pub participation: Option<f64>,
    pub prevalence: Option<f64>,
    pub dominant: String,
    pub dominant_share: Option<f64>,
    pub offset_network: String,
    pub score: Option<f64>,
}

impl Table for DriverRow {
    const HEADER: &'static [&'static str] = &[
        "rank",
        "path",
        "pattern",
        "short_direction",
        "long_direction",
        "other_directions",
        "total",
        "price",
        "utilization",
        "intensity",
        "participation",
        "prevalence",
        "dominant",
        "dominant_share",
        "offset_network",
        "score",
    ];
}
