//! Plot-data files: KPI trends with standard-error bands and CUSUM
//! trajectories with their thresholds. Each series gets a numbered file and
//! an index row mapping the file back to its drill path.

use std::path::Path;

use crate::error::{Error, Result};
use crate::hierarchy::{KpiKind, KpiPanel, NormalizedSeries};
use crate::spc::DetectionResult;

/// Two-sided 95% normal quantile used for the trend bands.
const BAND_Z: f64 = 1.959_963_984_540_054;

fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(csv::Writer::from_path(path)?)
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trends(out_dir: &Path, windows: &[(String, Vec<KpiPanel>)]) -> Result<()> {
    let root = out_dir.join("plots").join("trend");
    let index_path = root.join("index.csv");
    let mut index = writer(&index_path)?;
    index.write_record(["window", "path", "file"])?;
    for (window, panels) in windows {
        for (n, panel) in panels.iter().enumerate() {
            let rel = format!("{window}/p{n:04}.csv");
            index.write_record([window.as_str(), panel.path.as_str(), rel.as_str()])?;
            let path = root.join(&rel);
            let mut w = writer(&path)?;
            w.write_record(["period", "start", "end", "kpi", "value", "se", "lower", "upper"])?;
            for (p, k) in panel.periods.iter().enumerate() {
                for kind in KpiKind::ALL {
                    let e = k.kpi(kind);
                    let band = |sign: f64| Some(e.value? + sign * BAND_Z * e.se?);
                    w.write_record([
                        p.to_string(),
                        k.start.to_string(),
                        k.end.to_string(),
                        kind.as_str().to_string(),
                        num(e.value),
                        num(e.se),
                        num(band(-1.0)),
                        num(band(1.0)),
                    ])?;
                }
            }
            finish(w, &path)?;
        }
    }
    finish(index, &index_path)
}

pub struct CusumPlot {
    pub window: String,
    pub kpi: KpiKind,
    pub h_high: f64,
    pub h_low: f64,
    pub series: Vec<(String, NormalizedSeries, Option<DetectionResult>)>,
}

pub fn write_cusums(out_dir: &Path, plots: &[CusumPlot]) -> Result<()> {
    let root = out_dir.join("plots").join("cusum");
    let index_path = root.join("index.csv");
    let mut index = writer(&index_path)?;
    index.write_record(["window", "kpi", "path", "file"])?;
    for plot in plots {
        for (n, (path_key, z, result)) in plot.series.iter().enumerate() {
            let rel = format!("{}/{}/p{n:04}.csv", plot.window, plot.kpi.as_str());
            index.write_record([plot.window.as_str(), plot.kpi.as_str(), path_key.as_str(), rel.as_str()])?;
            let path = root.join(&rel);
            let mut w = writer(&path)?;
            w.write_record(["t", "z", "upper", "lower", "h_high", "h_low"])?;
            for (t, zt) in z.values.iter().enumerate() {
                w.write_record([
                    t.to_string(),
                    num(*zt),
                    num(result.as_ref().map(|r| r.upper[t])),
                    num(result.as_ref().map(|r| r.lower[t])),
                    plot.h_high.to_string(),
                    (-plot.h_low).to_string(),
                ])?;
            }
            finish(w, &path)?;
        }
    }
    finish(index, &index_path)
}
