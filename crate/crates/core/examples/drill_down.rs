//! Enumerates drill paths of a viewpoint and prints the KPI panel of one of
//! them, showing how the ratio chain `s = a·i·p·v` is populated.
//!
//! Run with `cargo run --example drill_down`.

use std::error::Error;
use std::path::Path;

use costdriver::claims::{generate_synthetic, EpisodeRules, LabeledClaims, SyntheticScenario};
use costdriver::hierarchy::{enumerate_paths, Aggregator, Attribute, KpiKind, ViewpointSpec, WindowSpec};
use costdriver::Month;

fn main() -> Result<(), Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/config/scenario.toml");
    let scenario = SyntheticScenario::from_toml(&std::fs::read_to_string(path)?)?;
    let data = generate_synthetic(&scenario)?;
    let claims = LabeledClaims::new(data.claims, &EpisodeRules::per_condition_and_type());

    let viewpoint = ViewpointSpec::new(vec![Attribute::Condition, Attribute::ClaimType, Attribute::DrugName], 10)?;
    let end: Month = scenario.start_month.offset(scenario.months as i32 - 1);
    let window = WindowSpec::new("short", 24, 3, end)?;
    let paths = enumerate_paths(&claims, &viewpoint, &window);
    println!("{} drill paths in window {}:", paths.len(), window.id);
    for p in &paths {
        println!("  {}{p}", "  ".repeat(p.depth() - 1));
    }

    let agg = Aggregator::new(&claims, &data.enrollment, &window, 3);
    let target = paths
        .iter()
        .find(|p| p.to_string().ends_with("drug_name=Metformin HCL"))
        .ok_or("Metformin HCL path not found")?;
    let panel = agg.panel(target);
    println!("\n{}", panel.path);
    println!("{:<9} {:>8} {:>8} {:>8} {:>7} {:>7} {:>7} {:>10}", "period", "s", "a", "e", "i", "p", "v", "se(s)");
    for period in &panel.periods {
        let v = |k: KpiKind| period.value(k).map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{:<9} {:>8} {:>8} {:>8} {:>7} {:>7} {:>7} {:>10.4}",
            period.start.to_string(),
            v(KpiKind::CostPerEnrollee),
            v(KpiKind::UnitPrice),
            v(KpiKind::Utilization),
            v(KpiKind::Intensity),
            v(KpiKind::Participation),
            v(KpiKind::Prevalence),
            period.kpi(KpiKind::CostPerEnrollee).se.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
