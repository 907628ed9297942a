use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

/// Compatibility-aware personalized model update experiments.
#[derive(Debug, Parser)]
#[command(name = "compatup", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a dataset against a config without training anything.
    Validate(ValidateArgs),
    /// Write a seeded synthetic dataset and its drift sidecar.
    Synth(SynthArgs),
    /// Run the full protocol and write manifest.json plus the CSV results.
    Run(RunArgs),
    /// Build plot data, an SVG chart and a markdown table from run outputs.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Run file (TOML) with protocol keys and a [dataset] table.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV; overrides dataset.path from the config.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Synthetic benchmark parameters (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; the sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory holding the outputs of `run`; reports are written there.
    #[arg(long)]
    out: PathBuf,
    /// Models to plot, comma separated; all when omitted.
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Validate(a) => commands::validate(a.config.as_deref(), a.data.as_deref()),
        Command::Synth(a) => commands::synth(a.config.as_deref(), &a.out, a.seed),
        Command::Run(a) => commands::run(commands::RunRequest {
            config: a.config.as_deref(),
            data: a.data.as_deref(),
            out: &a.out,
            seed: a.seed,
            jobs: a.jobs,
        }),
        Command::Report(a) => commands::report(&a.out, &a.models),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if commands::is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
