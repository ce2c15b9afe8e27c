//! Splits the impact of change of cost per enrollee into price, intensity,
//! participation and prevalence contributions.
//!
//! Run with `cargo run --example impact_decomposition`.

use std::error::Error;

use costdriver::impact::{ImpactBreakdown, ImpactConfig};

fn main() -> Result<(), Box<dyn Error>> {
    // Three years of annual KPIs for one treatment. Prevalence and intensity
    // are flat, participation grows 20% a year and price grows 3% a year.
    let v = [0.10, 0.10, 0.10];
    let i = [4.0, 4.0, 4.0];
    let p = [0.30, 0.36, 0.432];
    let a = [25.0, 25.75, 26.5225];
    let e: Vec<f64> = (0..3).map(|t| i[t] * p[t] * v[t]).collect();
    let s: Vec<f64> = (0..3).map(|t| a[t] * e[t]).collect();

    let config = ImpactConfig::new(0.8, 1, 3)?;
    let b = ImpactBreakdown::compute(&s, &a, &e, &i, &p, &v, &config)?.ok_or("not enough history")?;

    println!("cost per enrollee by year: {:.4} {:.4} {:.4}", s[0], s[1], s[2]);
    println!("impact of change   {:>9.5}", b.total);
    println!("  price            {:>9.5}", b.price);
    println!("  utilization      {:>9.5}", b.utilization);
    println!("    intensity      {:>9.5}", b.intensity);
    println!("    participation  {:>9.5}", b.participation);
    println!("    prevalence     {:>9.5}", b.prevalence);
    let (name, share) = b.dominant();
    println!("dominant component: {name} ({:.0}% of total)", 100.0 * share.unwrap_or(0.0));
    println!(
        "additivity: total - price - utilization = {:.2e}",
        b.total - b.price - b.utilization
    );
    Ok(())
}
