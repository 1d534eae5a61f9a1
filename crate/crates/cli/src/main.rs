mod advise;
mod approx;
mod commands;
mod error;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "multistop", version, about = "Optimal timing of multiple insurance claims")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the configuration or preset.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Built-in preset used when no configuration file is given.
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct HorizonArgs {
    /// Number of years T.
    #[arg(long)]
    pub years: Option<usize>,
    /// Number of claims k.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Writes the value table and the claim thresholds as CSV.
    ValueTable(HorizonArgs),
    /// Reads one annual gain per line and answers Claim or Wait.
    Advise {
        #[command(flatten)]
        horizon: HorizonArgs,
        /// Input lines are annual retained losses; the gain is their negative.
        #[arg(long)]
        loss: bool,
    },
    /// Runs a rule-comparison experiment.
    Experiment {
        /// Overrides the number of simulated paths.
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Fits the Laguerre series to a loss distribution and maps the positivity boundary.
    Approx {
        /// Number of points on the boundary curve.
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Runs the built-in numerical checks.
    Validate,
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    match cli.command {
        Command::ValueTable(h) => commands::value_table(g, &h),
        Command::Advise { horizon, loss } => {
            let stdin = std::io::stdin();
            advise::run(g, &horizon, loss, stdin.lock(), std::io::stdout())
        }
        Command::Experiment { paths } => commands::experiment(g, paths),
        Command::Approx { points } => approx::run(g, points),
        Command::Validate => validate::run(g),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
