//! Batch experiment harness for the measurelab library: convergence scans,
//! law-check suites, and disintegration runs with reproducible, seeded
//! batteries and deterministic artifacts.

mod commands;
mod config;
mod report;
mod serial;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "measurelab",
    version,
    about = "Exact measure-theory experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Artifact path (CSV or JSON depending on the command); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for randomized batteries.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override (rational or decimal, e.g. 1/10000 or 1e-4).
    #[arg(long)]
    tol: Option<String>,
    /// Maximum chain depth override.
    #[arg(long = "kmax")]
    k_max: Option<u32>,
    /// Norm override: l1 or l2.
    #[arg(long)]
    norm: Option<String>,
    /// Quadrature samples per axis override.
    #[arg(long)]
    quadrature: Option<u32>,
}

impl CommonArgs {
    fn overrides(&self) -> config::Overrides {
        config::Overrides {
            seed: self.seed,
            tol: self.tol.clone(),
            k_max: self.k_max,
            norm: self.norm.clone(),
            quadrature: self.quadrature,
        }
    }

    fn output(&self) -> report::Output {
        report::Output::new(self.out.clone())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Shrinking-cell average scans and Lebesgue-point verdicts.
    Lebesgue(CommonArgs),
    /// Radon-Nikodym ratio scans and derivative round-trip checks.
    Rn(CommonArgs),
    /// Law-check suites (lifting, lower-density, vector-measure,
    /// disintegration, approx-continuity).
    Laws {
        #[command(flatten)]
        common: CommonArgs,
        /// Suite override.
        #[arg(long)]
        suite: Option<String>,
    },
    /// Compute, verify, and export a disintegration.
    Disintegrate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also patch a seeded split and assert uniqueness.
        #[arg(long)]
        patch: bool,
    },
    /// Density points of a set (interval or partition basis).
    DensityPoints(CommonArgs),
    /// Variation table of a vector measure.
    Variation(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match &cli.command {
        Command::Lebesgue(common) => commands::lebesgue::run(common),
        Command::Rn(common) => commands::rn::run(common),
        Command::Laws { common, suite } => commands::laws::run(common, suite.as_deref()),
        Command::Disintegrate { common, patch } => commands::disintegrate::run(common, *patch),
        Command::DensityPoints(common) => commands::density_points::run(common),
        Command::Variation(common) => commands::variation::run(common),
    };
    let elapsed = started.elapsed();
    match outcome {
        Ok(passed) => {
            eprintln!(
                "measurelab: {} in {:.3}s",
                if passed {
                    "all checks passed"
                } else {
                    "CHECK FAILURES"
                },
                elapsed.as_secs_f64()
            );
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("measurelab: error: {err:#}");
            ExitCode::from(2)
        }
    }
}
