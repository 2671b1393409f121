//! `tickmc`: check, sweep, simulate and export tick-synchronized networks.

mod commands;
mod error;
mod load;
mod manifest;
mod sweep;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser)]
#[command(name = "tickmc", version, about = "Probabilistic model checking of tick-synchronized state machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every property of a property file.
    Check(CheckArgs),
    /// Evaluate one probability property over many configurations and ticks, as CSV.
    Sweep(SweepArgs),
    /// Estimate a probability property by Monte Carlo sampling.
    Simulate(SimulateArgs),
    /// Write the composed chain as DOT, JSON or PRISM.
    Export(ExportArgs),
    /// Print the nine bundled UVC scenario configurations.
    Scenarios(ScenariosArgs),
}

#[derive(Args)]
struct Common {
    /// Model file.
    model: PathBuf,
    /// Configuration files. Defaults to the property imports, then `<model>.pcfg`.
    #[arg(long = "configs", value_name = "FILE")]
    configs: Vec<PathBuf>,
    /// Maximum number of states to explore.
    #[arg(long, default_value_t = tickmc::composer::DEFAULT_STATE_CAP)]
    state_cap: usize,
    /// Write the result here (plus a `.manifest.json`) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Cumulative,
}

#[derive(Args)]
struct TickArgs {
    /// Evaluate at this tick.
    #[arg(long, conflicts_with = "t_range")]
    t: Option<u32>,
    /// Evaluate at every tick in `A..B` (inclusive).
    #[arg(long, value_parser = parse_range)]
    t_range: Option<RangeInclusive<u32>>,
    /// Override the tick mode of probability properties.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

impl TickArgs {
    fn ticks(&self) -> Option<Vec<u32>> {
        match (&self.t, &self.t_range) {
            (Some(t), _) => Some(vec![*t]),
            (None, Some(r)) => Some(r.clone().collect()),
            (None, None) => None,
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// Property file.
    #[arg(long)]
    props: PathBuf,
    /// Evaluate under this configuration instead of each property's own.
    #[arg(long)]
    config: Option<String>,
    #[command(flatten)]
    ticks: TickArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    props: PathBuf,
    /// Property to sweep. Defaults to the first probability property.
    #[arg(long)]
    property: Option<String>,
    /// Configurations to sweep. Defaults to every loaded configuration.
    #[arg(long = "config", value_name = "NAME")]
    names: Vec<String>,
    #[command(flatten)]
    ticks: TickArgs,
    /// Append risk-reduction factors against this scenario or ODS profile.
    #[arg(long)]
    rrf_baseline: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    props: PathBuf,
    /// Property to estimate. Defaults to the first probability property.
    #[arg(long)]
    property: Option<String>,
    #[arg(long)]
    config: Option<String>,
    /// Tick to estimate at. Required when the property is parameterized.
    #[arg(long)]
    t: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Json,
    Prism,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    config: String,
    #[arg(long, value_enum)]
    format: Format,
}

#[derive(Args)]
struct ScenariosArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(text: &str) -> Result<RangeInclusive<u32>, String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{text}`"))?;
    let a: u32 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u32 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if b < a {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("TICKMC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("TICKMC_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(CliError::analysis)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Check(a) => commands::check(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Export(a) => commands::export(a),
        Command::Scenarios(a) => commands::scenarios(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
