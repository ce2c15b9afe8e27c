//! The pipeline stages. Each stage reads the previous stage's files from the
//! output directory and writes its own, so staged and fused runs agree.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{NullChoice, OffsetUnit, PipelineConfig, RankBy, ReportScope};
use super::plots;
use super::tables::*;
use crate::claims::{
    generate_synthetic, parse_claims, parse_enrollment, write_claims, write_enrollment, ClaimRecord,
    EnrollmentRecord, Format, LabeledClaims, SyntheticScenario,
};
use crate::error::{Error, Result};
use crate::hierarchy::{
    enumerate_paths, is_ancestor, yoy_normalize, Aggregator, Attribute, DrillPath, KpiKind, NormalizedSeries, OTHER,
};
use crate::impact::{ewa_masked, yoy_differences, ImpactBreakdown, ImpactConfig};
use crate::offsets::{compute_migration, identify_offsets, offset_cost_impact, ComparabilityKb, TreatmentSignal};
use crate::patterns::characterize;
use crate::spc::{
    cusum, derive_seed, fit_null, learn_threshold, trial_grid, CalibrationPlan, CusumConfig, Direction, NullModel,
};

pub const CLAIMS: &str = "claims.csv";
pub const ENROLLMENT: &str = "enrollment.csv";
pub const GROUND_TRUTH: &str = "ground_truth.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Generate,
    Aggregate,
    Detect,
    Impact,
    Offsets,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Generate,
        Stage::Aggregate,
        Stage::Detect,
        Stage::Impact,
        Stage::Offsets,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Aggregate => "aggregate",
            Stage::Detect => "detect",
            Stage::Impact => "impact",
            Stage::Offsets => "offsets",
            Stage::Report => "report",
        }
    }
}

/// Runs one stage; errors are tagged with the stage name.
pub fn run_stage(stage: Stage, config: &PipelineConfig) -> Result<()> {
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let result = match stage {
        Stage::Generate => generate(config),
        Stage::Aggregate => aggregate(config),
        Stage::Detect => detect(config),
        Stage::Impact => impact(config),
        Stage::Offsets => offsets(config),
        Stage::Report => report(config),
    };
    result.map_err(|e| e.in_stage(stage.name()))
}

/// Every stage in order. `generate` is skipped when the config reads
/// claim files instead of a scenario.
pub fn run_pipeline(config: &PipelineConfig) -> Result<()> {
    for stage in Stage::ALL {
        if stage == Stage::Generate && config.scenario.is_none() {
            continue;
        }
        run_stage(stage, config)?;
    }
    Ok(())
}

fn out(config: &PipelineConfig, name: &str) -> PathBuf {
    config.out_dir.join(name)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn generate(config: &PipelineConfig) -> Result<()> {
    let Some(path) = &config.scenario else {
        return Err(Error::Config("`generate` needs a `scenario` file in the config".into()));
    };
    if !path.exists() {
        return Err(Error::MissingFile(path.clone()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut scenario = SyntheticScenario::from_toml(&text)?;
    if let Some(seed) = config.scenario_seed {
        scenario.seed = seed;
    }
    let data = generate_synthetic(&scenario)?;
    write_claims(create(&out(config, CLAIMS))?, &data.claims)?;
    write_enrollment(create(&out(config, ENROLLMENT))?, &data.enrollment)?;
    let truth = toml::to_string(&data.truth).map_err(|e| Error::Config(e.to_string()))?;
    let p = out(config, GROUND_TRUTH);
    std::fs::write(&p, truth).map_err(|e| Error::io(&p, e))
}

fn load_inputs(config: &PipelineConfig) -> Result<(Vec<ClaimRecord>, Vec<EnrollmentRecord>)> {
    let (claims, enrollment) = match (&config.claims, &config.enrollment) {
        (Some(c), Some(e)) => (c.clone(), e.clone()),
        _ => (out(config, CLAIMS), out(config, ENROLLMENT)),
    };
    let c = parse_claims(open(&claims)?, Format::default())?;
    let e = parse_enrollment(open(&enrollment)?, Format::default())?;
    Ok((c, e))
}

fn path_info(path: &DrillPath) -> PathInfo {
    let last = path.segments.last().expect("enumerated paths are non-empty");
    PathInfo {
        condition: path.value_of(Attribute::Condition).unwrap_or("").to_string(),
        leaf_attribute: last.attribute.as_str().to_string(),
        leaf_value: path.last_value().unwrap_or("").to_string(),
    }
}

fn aggregate(config: &PipelineConfig) -> Result<()> {
    let (claims, enrollment) = load_inputs(config)?;
    let end = claims
        .iter()
        .map(ClaimRecord::service_month)
        .max()
        .ok_or_else(|| Error::invalid("claims file has no rows"))?;
    let labeled = LabeledClaims::new(claims, &config.episodes);
    let mut rows = Vec::new();
    let mut trends = Vec::new();
    for wc in &config.windows {
        let window = wc.resolve(end)?;
        // Paths from every viewpoint, the first viewpoint winning on
        // identical keys.
        let mut seen = HashSet::new();
        let mut paths: Vec<(String, DrillPath)> = Vec::new();
        for vp in &config.viewpoints {
            for p in enumerate_paths(&labeled, vp, &window) {
                let key = p.to_string();
                if seen.insert(key.clone()) {
                    paths.push((key, p));
                }
            }
        }
        paths.sort_by(|a, b| a.0.cmp(&b.0));
        let agg = Aggregator::new(&labeled, &enrollment, &window, config.runout_months);
        let panels: Vec<_> = paths.par_iter().map(|(_, p)| (agg.panel(p), path_info(p))).collect();
        for (panel, info) in &panels {
            rows.extend(panel_rows(panel, info));
        }
        trends.push((window.id.clone(), panels.into_iter().map(|(p, _)| p).collect::<Vec<_>>()));
    }
    write_table(&out(config, PANELS), &rows)?;
    plots::write_trends(&config.out_dir, &trends)
}

fn load_panels(config: &PipelineConfig) -> Result<Vec<StoredPanel>> {
    panels_from_rows(&read_table(&out(config, PANELS))?)
}

/// Panels of each window, in file order.
fn by_window(panels: &[StoredPanel]) -> Vec<(String, Vec<&StoredPanel>)> {
    let mut out: Vec<(String, Vec<&StoredPanel>)> = Vec::new();
    for p in panels {
        match out.iter_mut().find(|(w, _)| *w == p.panel.window) {
            Some((_, v)) => v.push(p),
            None => out.push((p.panel.window.clone(), vec![p])),
        }
    }
    out
}

fn side_plan(
    config: &PipelineConfig,
    model: NullModel,
    length: usize,
    yoy_lag: Option<usize>,
    side: Direction,
    seed: u64,
) -> CalibrationPlan {
    let d = &config.detect;
    CalibrationPlan {
        model,
        k: d.k,
        length,
        target_far: d.target_far / 2.0,
        trial_thresholds: trial_grid(d.trials.start, d.trials.stop, d.trials.step),
        n_sims: d.n_sims,
        seed,
        reporting_rule: d.reporting_rule,
        side,
        auto_reset: d.auto_reset,
        yoy_lag,
    }
}

fn null_name(m: &NullModel) -> &'static str {
    match m.kind {
        crate::spc::NullKind::WhiteNoise => "WHITE_NOISE",
        crate::spc::NullKind::Ar1 => "AR1",
    }
}

fn detect(config: &PipelineConfig) -> Result<()> {
    let panels = load_panels(config)?;
    let mut detections = Vec::new();
    let mut thresholds = Vec::new();
    let mut trajectories = Vec::new();
    for (w_idx, (window, members)) in by_window(&panels).into_iter().enumerate() {
        for (k_idx, &kpi) in config.detect.kpis.iter().enumerate() {
            let series: Vec<NormalizedSeries> = members
                .iter()
                .map(|p| yoy_normalize(&p.panel, kpi))
                .collect::<Result<_>>()?;
            let length = series.first().map_or(0, NormalizedSeries::len);
            if length == 0 {
                continue;
            }
            // The standard null simulates unit-variance KPI levels and
            // differences them like the data; the fitted null models the
            // normalized series directly.
            let (model, yoy_lag) = match config.detect.null_model {
                NullChoice::Standard => (NullModel::white_noise(1.0), Some(members[0].panel.periods_per_year)),
                NullChoice::Fit => (fit_null(&series).unwrap_or(NullModel::white_noise(1.0)), None),
            };
            let mut h = [0.0; 2];
            for (s_idx, side) in [Direction::Up, Direction::Down].into_iter().enumerate() {
                let seed = derive_seed(config.seed, ((w_idx * 64 + k_idx) * 2 + s_idx) as u64);
                let report = learn_threshold(&side_plan(config, model, length, yoy_lag, side, seed))?;
                h[s_idx] = report.threshold;
                for t in &report.trials {
                    thresholds.push(ThresholdRow {
                        window: window.clone(),
                        kpi,
                        side,
                        threshold: t.threshold,
                        far: t.far,
                        n_sims: report.n_sims,
                        seed: report.seed,
                        selected: t.threshold == report.threshold,
                        null_kind: null_name(&model).to_string(),
                        null_sigma: model.sigma,
                        null_phi: model.phi,
                        warning: report.warning.clone().unwrap_or_default(),
                    });
                }
            }
            let mut cfg = CusumConfig::new(config.detect.k, h[0], h[1], config.detect.reporting_rule);
            cfg.auto_reset = config.detect.auto_reset;
            let results: Vec<_> = series.par_iter().map(|z| cusum(z, &cfg).ok()).collect();
            for (p, r) in members.iter().zip(&results) {
                detections.push(match r {
                    Some(r) => DetectionRow {
                        window: window.clone(),
                        path: p.panel.path.clone(),
                        kpi,
                        direction: r.direction,
                        flagged_up: r.flagged_up,
                        flagged_down: r.flagged_down,
                        first_crossing_up: r.first_crossing_up,
                        first_crossing_down: r.first_crossing_down,
                        final_upper: Some(r.final_upper()),
                        final_lower: Some(r.final_lower()),
                        h_high: h[0],
                        h_low: h[1],
                    },
                    None => DetectionRow {
                        window: window.clone(),
                        path: p.panel.path.clone(),
                        kpi,
                        direction: Direction::Flat,
                        flagged_up: false,
                        flagged_down: false,
                        first_crossing_up: None,
                        first_crossing_down: None,
                        final_upper: None,
                        final_lower: None,
                        h_high: h[0],
                        h_low: h[1],
                    },
                });
            }
            trajectories.push(plots::CusumPlot {
                window: window.clone(),
                kpi,
                h_high: h[0],
                h_low: h[1],
                series: members
                    .iter()
                    .zip(series)
                    .zip(results)
                    .map(|((p, z), r)| (p.panel.path.clone(), z, r))
                    .collect(),
            });
        }
    }
    write_table(&out(config, THRESHOLDS), &thresholds)?;
    write_table(&out(config, DETECTIONS), &detections)?;
    plots::write_cusums(&config.out_dir, &trajectories)
}

fn breakdown(panel: &crate::hierarchy::KpiPanel, w: f64) -> Result<Option<ImpactBreakdown>> {
    let cfg = ImpactConfig::new(w, panel.periods_per_year, panel.periods.len())?;
    let s = |k| panel.series(k);
    ImpactBreakdown::compute(
        &s(KpiKind::CostPerEnrollee),
        &s(KpiKind::UnitPrice),
        &s(KpiKind::Utilization),
        &s(KpiKind::Intensity),
        &s(KpiKind::Participation),
        &s(KpiKind::Prevalence),
        &cfg,
    )
}

fn impact(config: &PipelineConfig) -> Result<()> {
    let panels = load_panels(config)?;
    let rows: Vec<ImpactRow> = panels
        .par_iter()
        .map(|p| {
            let b = breakdown(&p.panel, config.impact.w)?;
            Ok(ImpactRow {
                window: p.panel.window.clone(),
                path: p.panel.path.clone(),
                total: b.map(|b| b.total),
                price: b.map(|b| b.price),
                utilization: b.map(|b| b.utilization),
                intensity: b.map(|b| b.intensity),
                participation: b.map(|b| b.participation),
                prevalence: b.map(|b| b.prevalence),
                delta1: b.map(|b| b.delta1),
                delta2: b.map(|b| b.delta2),
            })
        })
        .collect::<Result<_>>()?;
    write_table(&out(config, IMPACTS), &rows)
}

/// Volume change and lagged unit price of a treatment panel.
fn treatment_signal(p: &StoredPanel, unit: OffsetUnit, w: f64, direction: Direction) -> Option<TreatmentSignal> {
    let t = p.panel.periods_per_year;
    let volume: Vec<Option<f64>> = match unit {
        OffsetUnit::Quantity => p.panel.quantities(),
        OffsetUnit::Claimants => p.panel.periods.iter().map(|k| Some(k.claimants as f64)).collect(),
    };
    let change = ewa_masked(&yoy_differences(&volume, t), w).ok()??;
    let prices = p.panel.series(KpiKind::UnitPrice);
    let lagged = &prices[..prices.len() - t];
    let lagged_price = ewa_masked(lagged, w).ok().flatten();
    Some(TreatmentSignal {
        path: p.panel.path.clone(),
        condition: p.info.condition.clone(),
        treatment: p.info.leaf_value.clone(),
        direction,
        change,
        lagged_price,
    })
}

fn offsets(config: &PipelineConfig) -> Result<()> {
    let panels = load_panels(config)?;
    let detections: Vec<DetectionRow> = read_table(&out(config, DETECTIONS))?;
    let mut rows = Vec::new();
    let Some(kb_path) = &config.kb else {
        return write_table(&out(config, OFFSETS), &rows);
    };
    let kb = ComparabilityKb::load(kb_path)?;
    if !config.detect.kpis.contains(&KpiKind::Utilization) {
        return Err(Error::Config("offsets need `utilization` among [detect] kpis".into()));
    }
    let direction: HashMap<(&str, &str), Direction> = detections
        .iter()
        .filter(|d| d.kpi == KpiKind::Utilization)
        .map(|d| ((d.window.as_str(), d.path.as_str()), d.direction))
        .collect();
    let windows = by_window(&panels);
    for window in config.offset_windows() {
        let Some((_, members)) = windows.iter().find(|(w, _)| w == window) else {
            continue;
        };
        let signals: Vec<TreatmentSignal> = members
            .iter()
            .filter(|p| !p.info.condition.is_empty() && p.info.leaf_attribute != "condition" && p.info.leaf_value != OTHER)
            .filter_map(|p| {
                let d = *direction.get(&(window, p.panel.path.as_str()))?;
                treatment_signal(p, config.offsets.unit, config.impact.w, d)
            })
            .collect();
        let by_path: HashMap<&str, &StoredPanel> = members.iter().map(|p| (p.panel.path.as_str(), *p)).collect();
        for net in identify_offsets(&signals, &kb, window) {
            let flows = compute_migration(&net)?;
            let panel = &by_path[net.originators[0].path.as_str()].panel;
            let t = panel.periods_per_year;
            let mm = panel.member_months();
            let member_months = mm[t..].iter().sum::<f64>() / (mm.len() - t) as f64;
            let impact = offset_cost_impact(&net, &flows, member_months).ok();
            let base = |record, from: &str, to: &str, path: &str| OffsetRow {
                network: net.id.clone(),
                window: net.window.clone(),
                condition: net.condition.clone(),
                record,
                from: from.to_string(),
                to: to.to_string(),
                path: path.to_string(),
                capacity: None,
                volume: 0.0,
                lagged_price: None,
                impact_pmpm: None,
                member_months: None,
            };
            rows.push(OffsetRow {
                volume: flows.total,
                impact_pmpm: impact,
                member_months: Some(member_months),
                ..base(OffsetRecord::Network, "", "", "")
            });
            for (n, v) in net.originators.iter().zip(&flows.outflows) {
                rows.push(OffsetRow {
                    capacity: Some(n.capacity),
                    volume: *v,
                    lagged_price: n.lagged_price,
                    ..base(OffsetRecord::Originator, &n.treatment, "", &n.path)
                });
            }
            for (n, v) in net.receivers.iter().zip(&flows.inflows) {
                rows.push(OffsetRow {
                    capacity: Some(n.capacity),
                    volume: *v,
                    lagged_price: n.lagged_price,
                    ..base(OffsetRecord::Receiver, "", &n.treatment, &n.path)
                });
            }
            for f in &flows.flows {
                rows.push(OffsetRow {
                    volume: f.volume,
                    ..base(
                        OffsetRecord::Flow,
                        &net.originators[f.from].treatment,
                        &net.receivers[f.to].treatment,
                        "",
                    )
                });
            }
        }
    }
    write_table(&out(config, OFFSETS), &rows)
}

fn report(config: &PipelineConfig) -> Result<()> {
    let impacts: Vec<ImpactRow> = read_table(&out(config, IMPACTS))?;
    let detections: Vec<DetectionRow> = read_table(&out(config, DETECTIONS))?;
    let offsets: Vec<OffsetRow> = read_table(&out(config, OFFSETS))?;
    let rows = build_report(config, &impacts, &detections, &offsets);
    write_table(&out(config, DRIVERS), &rows)
}

/// Ranks the impact window's paths into the drivers report.
pub fn build_report(
    config: &PipelineConfig,
    impacts: &[ImpactRow],
    detections: &[DetectionRow],
    offsets: &[OffsetRow],
) -> Vec<DriverRow> {
    let (short, long, target) = (config.short_window(), config.long_window(), config.impact_window());
    let mut dir: HashMap<(&str, &str, KpiKind), Direction> = HashMap::new();
    let mut screened = HashSet::new();
    for d in detections {
        dir.insert((d.window.as_str(), d.path.as_str(), d.kpi), d.direction);
        screened.insert(d.path.as_str());
    }
    let get = |w: &str, p: &str, k: KpiKind| dir.get(&(w, p, k)).copied().unwrap_or(Direction::Flat);
    let mut networks: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for o in offsets.iter().filter(|o| !o.path.is_empty()) {
        let ids = networks.entry(o.path.as_str()).or_default();
        if !ids.contains(&o.network.as_str()) {
            ids.push(o.network.as_str());
        }
    }
    let candidates: Vec<&ImpactRow> = impacts
        .iter()
        .filter(|r| r.window == target && screened.contains(r.path.as_str()))
        .collect();
    let keep = |r: &ImpactRow| match config.report.scope {
        ReportScope::All => true,
        ReportScope::Leaves => !candidates.iter().any(|c| is_ancestor(&r.path, &c.path)),
    };
    let primary = config.detect.kpis[0];
    let mut rows: Vec<(bool, DriverRow)> = candidates
        .iter()
        .filter(|r| keep(r))
        .map(|r| {
            let p = r.path.as_str();
            let (s, l) = (get(short, p, primary), get(long, p, primary));
            let flagged = config
                .detect
                .kpis
                .iter()
                .any(|&k| get(short, p, k) != Direction::Flat || get(long, p, k) != Direction::Flat);
            let other = config.detect.kpis[1..]
                .iter()
                .map(|&k| format!("{}:{}/{}", k.as_str(), get(short, p, k), get(long, p, k)))
                .collect::<Vec<_>>()
                .join(";");
            let leaves = [
                ("price", r.price),
                ("intensity", r.intensity),
                ("participation", r.participation),
                ("prevalence", r.prevalence),
            ];
            let (dominant, share) = match r.total {
                Some(total) => {
                    let (name, v) = leaves
                        .iter()
                        .map(|(n, v)| (*n, v.unwrap_or(0.0)))
                        .fold(("price", 0.0_f64), |b, c| if c.1.abs() > b.1.abs() { c } else { b });
                    (name.to_string(), (total != 0.0).then(|| v.abs() / total.abs()))
                }
                None => (String::new(), None),
            };
            let row = DriverRow {
                rank: 0,
                path: r.path.clone(),
                pattern: characterize(s, l).as_str().to_string(),
                short_direction: s,
                long_direction: l,
                other_directions: other,
                total: r.total,
                price: r.price,
                utilization: r.utilization,
                intensity: r.intensity,
                participation: r.participation,
                prevalence: r.prevalence,
                dominant,
                dominant_share: share,
                offset_network: networks.get(p).map(|v| v.join(";")).unwrap_or_default(),
                score: r.total.map(f64::abs),
            };
            (flagged, row)
        })
        .collect();
    let by_flag = config.report.rank_by == RankBy::FlaggedFirst;
    rows.sort_by(|(fa, a), (fb, b)| {
        let flag = if by_flag { fb.cmp(fa) } else { std::cmp::Ordering::Equal };
        let score = |r: &DriverRow| r.score.unwrap_or(f64::NEG_INFINITY);
        flag.then(score(b).total_cmp(&score(a))).then_with(|| a.path.cmp(&b.path))
    });
    rows.into_iter()
        .enumerate()
        .map(|(i, (_, mut r))| {
            r.rank = i + 1;
            r
        })
        .collect()
}
