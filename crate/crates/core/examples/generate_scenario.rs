//! Generates the example synthetic scenario and summarises what it contains.
//!
//! Run with `cargo run --example generate_scenario`.

use std::collections::BTreeMap;
use std::error::Error;
use std::path::Path;

use costdriver::claims::{generate_synthetic, SyntheticScenario};

fn main() -> Result<(), Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/config/scenario.toml");
    let scenario = SyntheticScenario::from_toml(&std::fs::read_to_string(path)?)?;
    let data = generate_synthetic(&scenario)?;

    println!(
        "{} enrollees over {} months from {}: {} claims, {} enrollment rows",
        scenario.n_enrollees,
        scenario.months,
        scenario.start_month,
        data.claims.len(),
        data.enrollment.len()
    );

    let mut by_drug: BTreeMap<(&str, &str), (usize, f64)> = BTreeMap::new();
    for c in &data.claims {
        let e = by_drug.entry((c.condition.as_str(), c.drug_name.as_str())).or_default();
        e.0 += 1;
        e.1 += c.allowed_amount;
    }
    println!("\n{:<8} {:<28} {:>8} {:>12}", "cond", "treatment", "claims", "allowed");
    for ((cond, drug), (n, amount)) in &by_drug {
        let name = if drug.is_empty() { "(non-drug)" } else { drug };
        println!("{cond:<8} {name:<28} {n:>8} {amount:>12.2}");
    }

    println!("\nground truth:");
    for inj in &data.truth.injections {
        println!(
            "  {:?} {:?} of {}/{} from month {} by {:+}",
            inj.shape,
            inj.component,
            inj.condition,
            inj.treatment.as_deref().unwrap_or("*"),
            inj.onset_month,
            inj.magnitude
        );
    }
    for s in &data.truth.offset_scripts {
        println!(
            "  switch {} -> {} ({}) from month {} at {:.0}%/month",
            s.from_treatment,
            s.to_treatment,
            s.condition,
            s.onset_month,
            100.0 * s.monthly_switch_fraction
        );
    }
    Ok(())
}
