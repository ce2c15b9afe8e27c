//! The pipeline configuration document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::claims::EpisodeRules;
use crate::error::{Error, Result};
use crate::hierarchy::{KpiKind, ViewpointSpec, WindowSpec};
use crate::month::Month;
use crate::spc::ReportingRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowRole {
    Short,
    Long,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub id: String,
    pub role: WindowRole,
    pub horizon_months: u32,
    pub resolution_months: u32,
    /// Last month of the window; defaults to the latest service month.
    #[serde(default)]
    pub end_month: Option<Month>,
}

impl WindowConfig {
    pub fn resolve(&self, default_end: Month) -> Result<WindowSpec> {
        WindowSpec::new(
            &self.id,
            self.horizon_months,
            self.resolution_months,
            self.end_month.unwrap_or(default_end),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullChoice {
    /// Independent unit-variance KPI levels passed through the same
    /// year-over-year normalization as the data, the distribution of a
    /// correctly normalized series under no change.
    Standard,
    /// White noise or AR1 fitted to the observed normalized series of each
    /// window and KPI.
    Fit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectConfig {
    pub kpis: Vec<KpiKind>,
    pub k: f64,
    /// Per-series false-alarm target, shared equally by the two directions.
    pub target_far: f64,
    pub reporting_rule: ReportingRule,
    pub auto_reset: bool,
    pub n_sims: usize,
    pub trials: TrialGrid,
    pub null_model: NullChoice,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            kpis: vec![KpiKind::CostPerEnrollee, KpiKind::Utilization],
            k: 0.5,
            target_far: 0.05,
            reporting_rule: ReportingRule::EndOfWindow,
            auto_reset: false,
            n_sims: 5000,
            trials: TrialGrid {
                start: 0.05,
                stop: 12.0,
                step: 0.05,
            },
            null_model: NullChoice::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpactSettings {
    pub w: f64,
}

impl Default for ImpactSettings {
    fn default() -> Self {
        ImpactSettings { w: 0.8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetUnit {
    Quantity,
    Claimants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OffsetSettings {
    pub unit: OffsetUnit,
    /// Windows to search; all windows when empty.
    pub windows: Vec<String>,
}

impl Default for OffsetSettings {
    fn default() -> Self {
        OffsetSettings {
            unit: OffsetUnit::Quantity,
            windows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportScope {
    Leaves,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    /// `|I_total|`.
    AbsTotal,
    /// Paths with any flag first, then `|I_total|`.
    FlaggedFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSettings {
    pub scope: ReportScope,
    pub rank_by: RankBy,
    /// Window whose impacts are ranked; defaults to the first short window.
    pub impact_window: Option<String>,
    pub short_window: Option<String>,
    pub long_window: Option<String>,
}

impl Default for ReportSettings {
    fn default() -> Self {
        ReportSettings {
            scope: ReportScope::Leaves,
            rank_by: RankBy::AbsTotal,
            impact_window: None,
            short_window: None,
            long_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default = "default_runout")]
    pub runout_months: u32,
    /// Synthetic scenario file; mutually exclusive with `claims`.
    #[serde(default)]
    pub scenario: Option<PathBuf>,
    #[serde(default)]
    pub claims: Option<PathBuf>,
    #[serde(default)]
    pub enrollment: Option<PathBuf>,
    #[serde(default)]
    pub kb: Option<PathBuf>,
    #[serde(default = "EpisodeRules::per_condition_and_type")]
    pub episodes: EpisodeRules,
    #[serde(rename = "viewpoint")]
    pub viewpoints: Vec<ViewpointSpec>,
    #[serde(rename = "window")]
    pub windows: Vec<WindowConfig>,
    #[serde(default)]
    pub detect: DetectConfig,
    #[serde(default)]
    pub impact: ImpactSettings,
    #[serde(default)]
    pub offsets: OffsetSettings,
    #[serde(default)]
    pub report: ReportSettings,
    /// Replaces the scenario file's own seed when set (the CLI `--seed`).
    #[serde(skip)]
    pub scenario_seed: Option<u64>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_runout() -> u32 {
    3
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut c.out_dir);
        for p in [&mut c.scenario, &mut c.claims, &mut c.enrollment, &mut c.kb]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match (&self.scenario, &self.claims, &self.enrollment) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => {}
            _ => return bad("set either `scenario`, or both `claims` and `enrollment`".into()),
        }
        if self.viewpoints.is_empty() {
            return bad("at least one [[viewpoint]] is required".into());
        }
        for v in &self.viewpoints {
            v.validate()?;
        }
        let mut ids = std::collections::BTreeSet::new();
        for w in &self.windows {
            if w.id.is_empty() || w.id.contains(['/', '\\']) || !ids.insert(w.id.as_str()) {
                return bad(format!("window id {:?} must be unique, non-empty and path-safe", w.id));
            }
            // End month does not affect shape checks.
            w.resolve(Month::new(2000, 1)?)?;
        }
        for role in [WindowRole::Short, WindowRole::Long] {
            if !self.windows.iter().any(|w| w.role == role) {
                return bad(format!("at least one {role:?} window is required").to_lowercase());
            }
        }
        let d = &self.detect;
        if d.kpis.is_empty() || !(d.k >= 0.0) || !(d.target_far > 0.0 && d.target_far < 1.0) || d.n_sims < 100 {
            return bad("[detect] needs kpis, k >= 0, 0 < target_far < 1 and n_sims >= 100".into());
        }
        let g = &d.trials;
        if !(g.start > 0.0 && g.step > 0.0 && g.stop >= g.start) {
            return bad("[detect.trials] needs 0 < start <= stop and step > 0".into());
        }
        if !(self.impact.w > 0.0 && self.impact.w < 1.0) {
            return bad(format!("[impact] w = {} must lie in (0, 1)", self.impact.w));
        }
        let known = |id: &Option<String>| id.as_ref().is_none_or(|id| ids.contains(id.as_str()));
        let r = &self.report;
        if !known(&r.impact_window) || !known(&r.short_window) || !known(&r.long_window) {
            return bad("[report] names a window that is not configured".into());
        }
        if let Some(w) = self.offsets.windows.iter().find(|w| !ids.contains(w.as_str())) {
            return bad(format!("[offsets] names unknown window {w}"));
        }
        Ok(())
    }

    fn first_of(&self, role: WindowRole) -> &str {
        &self.windows.iter().find(|w| w.role == role).expect("validated").id
    }

    pub fn short_window(&self) -> &str {
        self.report.short_window.as_deref().unwrap_or(self.first_of(WindowRole::Short))
    }

    pub fn long_window(&self) -> &str {
        self.report.long_window.as_deref().unwrap_or(self.first_of(WindowRole::Long))
    }

    pub fn impact_window(&self) -> &str {
        self.report.impact_window.as_deref().unwrap_or(self.first_of(WindowRole::Short))
    }

    pub fn offset_windows(&self) -> Vec<&str> {
        if self.offsets.windows.is_empty() {
            self.windows.iter().map(|w| w.id.as_str()).collect()
        } else {
            self.offsets.windows.iter().map(String::as_str).collect()
        }
    }
}
