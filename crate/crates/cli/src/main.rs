//! `hopred`: command-line frontend for the handover prediction toolkit.
//!
//! Subcommands cover the whole pipeline: synthesize traces, build windowed
//! datasets and train the classifier, evaluate operating points, sweep the
//! history/horizon parameters, translate metrics into resource costs, and
//! replay/serve measurement streams as NDJSON. Every command writes a
//! manifest with the SHA-256 of its inputs and outputs; identical inputs and
//! seeds reproduce identical files.

mod commands;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

/// Environment variable naming the directory all relative output paths are
/// resolved against.
pub const OUTPUT_ROOT_ENV: &str = "HOPRED_OUTPUT_ROOT";

#[derive(Parser)]
#[command(name = "hopred", version, about = "Handover prediction and resource-cost toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic measurement trace.
    Simulate(commands::simulate::SimulateArgs),
    /// Train the sequence classifier on a trace.
    Train(commands::train::TrainArgs),
    /// Evaluate trained weights on a trace split.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Retrain and evaluate across prediction horizons or histories.
    Sweep(commands::sweep::SweepArgs),
    /// Cost surfaces and cost comparison against always-buy.
    Cost(commands::cost::CostArgs),
    /// Replay a trace as an NDJSON indication stream.
    Replay(commands::replay::ReplayArgs),
    /// Serve purchase decisions over an NDJSON stream.
    Serve(commands::serve::ServeArgs),
    /// Run the canned experiment chains end to end.
    Repro(commands::repro::ReproArgs),
}

/// Resolves a possibly relative path under the output root.
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) => PathBuf::from(root).join(path),
        None => path.to_path_buf(),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Sweep(args) => commands::sweep::run(args),
        Command::Cost(args) => commands::cost::run(args),
        Command::Replay(args) => commands::replay::run(args),
        Command::Serve(args) => commands::serve::run(args),
        Command::Repro(args) => commands::repro::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
