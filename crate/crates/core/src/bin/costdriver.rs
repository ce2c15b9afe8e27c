use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use costdriver::pipeline::{run_pipeline, run_stage, PipelineConfig, Stage};

#[derive(Parser)]
#[command(name = "costdriver", version, about = "Detect and rank emerging cost drivers in claims data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed and the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic claims, enrollment and ground truth from the scenario.
    Generate(Common),
    /// Build KPI panels for every drill path and window.
    Aggregate(Common),
    /// Learn thresholds and run CUSUM detection on the panels.
    Detect(Common),
    /// Decompose the impact of change for every panel.
    Impact(Common),
    /// Find offset networks and their migration flows.
    Offsets(Common),
    /// Rank drill paths into the drivers report.
    Report(Common),
    /// Run every stage in order.
    Run(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return if usage_error { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (stage, common) = match cli.command {
        Command::Generate(c) => (Some(Stage::Generate), c),
        Command::Aggregate(c) => (Some(Stage::Aggregate), c),
        Command::Detect(c) => (Some(Stage::Detect), c),
        Command::Impact(c) => (Some(Stage::Impact), c),
        Command::Offsets(c) => (Some(Stage::Offsets), c),
        Command::Report(c) => (Some(Stage::Report), c),
        Command::Run(c) => (None, c),
    };
    let result = PipelineConfig::load(&common.config).and_then(|mut config| {
        if let Some(seed) = common.seed {
            config.seed = seed;
            config.scenario_seed = Some(seed);
        }
        if let Some(out) = common.out {
            config.out_dir = out;
        }
        match stage {
            Some(s) => run_stage(s, &config),
            None => run_pipeline(&config),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("costdriver: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
