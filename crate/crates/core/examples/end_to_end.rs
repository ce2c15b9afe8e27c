//! Runs the full batch job on the example configuration and prints the top
//! of the ranked report.
//!
//! Run with `cargo run --example end_to_end [out_dir]`.

use std::error::Error;
use std::path::{Path, PathBuf};

use costdriver::pipeline::{read_table, run_pipeline, DriverRow, PipelineConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/config/pipeline.toml");
    let mut config = PipelineConfig::load(&path)?;
    config.out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("costdriver-example"));
    run_pipeline(&config)?;

    let report: Vec<DriverRow> = read_table(&config.out_dir.join("drivers.csv"))?;
    println!("wrote outputs to {}", config.out_dir.display());
    println!("\n{:>4}  {:<56} {:<22} {:<14} {:>9}", "rank", "path", "pattern", "dominant", "impact");
    for row in report.iter().take(5) {
        println!(
            "{:>4}  {:<56} {:<22} {:<14} {:>9.4}",
            row.rank,
            row.path,
            row.pattern,
            row.dominant,
            row.total.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
