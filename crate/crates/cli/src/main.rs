use clap::{Parser, Subcommand};
use spikedepth_cli::commands::{
    self, ClassifyArgs, DepthArgs, DetectArgs, MedianArgs, ReproduceArgs, SimulateCommand,
};
use spikedepth_cli::error::CliResult;

/// Depth-based statistics for spike trains: simulation, depth scoring, median
/// estimation, outlier detection, classification, and the simulation-study
/// harness.
#[derive(Parser)]
#[command(name = "spikedepth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate spike train samples.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Score a train file against a fitted or declared intensity model.
    Depth(DepthArgs),
    /// Estimate the depth-based median train.
    Median(MedianArgs),
    /// Flag depth outliers at a chosen level.
    Detect(DetectArgs),
    /// Train and apply a classifier on labeled train files.
    Classify(ClassifyArgs),
    /// Run a full simulation study and write its result tables.
    Reproduce(ReproduceArgs),
}

fn configure_worker_pool() {
    if let Ok(value) = std::env::var("SPIKEDEPTH_WORKERS") {
        if let Ok(workers) = value.parse::<usize>() {
            if workers > 0 {
                // Ignore failure: the global pool may already be initialized.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build_global();
            }
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(cmd) => commands::run_simulate(cmd),
        Command::Depth(args) => commands::run_depth(args),
        Command::Median(args) => commands::run_median(args),
        Command::Detect(args) => commands::run_detect(args),
        Command::Classify(args) => commands::run_classify(args),
        Command::Reproduce(args) => commands::run_reproduce(args),
    }
}

fn main() {
    configure_worker_pool();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
