//! `faultcurve`: generate fault-discovery data, fit growth models to it and
//! compare the models across subjects.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use faultcurve::harness::FilterPolicy;
use faultcurve::models::ModelId;

#[derive(Debug, Parser)]
#[command(name = "faultcurve", version, about = "Fault-discovery curves for random testing")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand; each uses the ones it needs.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for sessions, simulations and fit multistarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output directory.
    #[arg(long, global = true, env = "FAULTCURVE_OUT", default_value = "faultcurve-out")]
    pub out: PathBuf,

    /// Curve points used when fitting.
    #[arg(long, global = true, default_value_t = 512)]
    pub grid_points: usize,

    /// Multistarts per model fit.
    #[arg(long, global = true, default_value_t = 16)]
    pub starts: usize,

    /// Model the others are compared against.
    #[arg(long, global = true, default_value = "phi5")]
    pub reference: ModelId,

    /// How session curves are combined.
    #[arg(long, global = true, value_enum, default_value_t = Aggregate::Mean)]
    pub aggregate: Aggregate,

    /// Shorthand for `--aggregate median`.
    #[arg(long, global = true)]
    pub median: bool,

    /// Which failures count as faults.
    #[arg(long, global = true, default_value = "contract")]
    pub policy: FilterPolicy,
}

impl Common {
    pub fn aggregation(&self) -> Aggregate {
        if self.median {
            Aggregate::Median
        } else {
            self.aggregate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Aggregate {
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Score {
    R2,
    Rmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Uniform,
    Geometric,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run random-testing sessions on built-in subjects and write event logs.
    Harness(HarnessArgs),
    /// Simulate the coupon-collector model and write mean detection curves.
    Simulate(SimulateArgs),
    /// Fit models to every subject and write fits, rankings and plot data.
    Fit(FitArgs),
    /// Re-rank existing fits, e.g. against another reference model.
    Rank(InputArgs),
    /// Signed-rank comparison of the reference model against the others.
    Compare(CompareArgs),
    /// Per-subject summary statistics of the session curves.
    Stats(InputArgs),
    /// Fit, compare and summarize in one go.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct HarnessArgs {
    /// Subject to test (repeatable); all built-in subjects by default.
    #[arg(long = "subject")]
    pub subjects: Vec<String>,

    /// Sessions per subject.
    #[arg(long, short = 's', default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub sessions: u64,

    /// Test cases drawn per session.
    #[arg(long, short = 't', default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub draws: u64,

    /// Use the corrected subject variants.
    #[arg(long)]
    pub clean: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Distribution::Geometric)]
    pub distribution: Distribution,

    /// Number of targets N.
    #[arg(long, default_value_t = 8)]
    pub targets: usize,

    /// Total hit probability of the targets.
    #[arg(long, default_value_t = 0.4)]
    pub theta: f64,

    /// Ratio between consecutive target probabilities.
    #[arg(long, default_value_t = 10.0)]
    pub base: f64,

    /// Draws per run.
    #[arg(long, short = 't', default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub draws: u64,

    /// Runs averaged into each curve.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,

    /// Independent curves to write; curve `c` uses seed `seed + c`.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub curves: u64,

    /// Also write the exact expected draws to detect each number of targets.
    #[arg(long)]
    pub tau: bool,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Directory holding the input files.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Comma-separated model tokens, or `all`; phi1..phi9 by default.
    #[arg(long)]
    pub models: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Score paired across subjects.
    #[arg(long, value_enum, default_value_t = Score::R2)]
    pub score: Score,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub fit: FitArgs,

    #[arg(long, value_enum, default_value_t = Score::R2)]
    pub score: Score,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
