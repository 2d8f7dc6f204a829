//! `rta`: solve parameter-dependent hyperbolic problems once, then rebuild
//! solutions at new parameters by translating the stored snapshots.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::Experiment;

#[derive(Parser)]
#[command(
    name = "rta",
    version,
    about = "Reconstruct parameterized finite-volume solutions by translating stored snapshots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output directory; defaults to [output].dir from the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for independent work items.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct StepOrTime {
    /// Time-step index to reconstruct.
    #[arg(long)]
    step: Option<usize>,

    /// Physical time, rounded to the nearest stored step.
    #[arg(long)]
    time: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured model once per snapshot parameter and persist
    /// the trajectories.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also dump each trajectory as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Rebuild the solution at a new parameter from a stored snapshot,
    /// without time stepping.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Stored snapshot trajectory file.
        #[arg(long, value_name = "PATH")]
        snapshot: PathBuf,
        /// Target parameter.
        #[arg(long)]
        mu: f64,
        #[command(flatten)]
        when: StepOrTime,
    },
    /// Mesh-refinement error study with fitted convergence rates.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Also write per-step error histories on the configured mesh.
        #[arg(long)]
        history: bool,
    },
    /// Elastic wave reconstruction next to a direct solve, in both
    /// characteristic and physical variables.
    Elasto {
        #[command(flatten)]
        common: Common,
    },
    /// Pick the best stored snapshot for a target parameter.
    Dict {
        #[command(flatten)]
        common: Common,
        /// Target parameter.
        #[arg(long)]
        mu: f64,
        /// Time-step index for the measured ranking.
        #[arg(long)]
        step: Option<usize>,
        /// Rank by measured error against a fresh reference solve instead
        /// of wavespeed distance.
        #[arg(long, requires = "step")]
        reference: bool,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Solve { common, .. }
        | Command::Reconstruct { common, .. }
        | Command::Converge { common, .. }
        | Command::Elasto { common }
        | Command::Dict { common, .. } => common,
    };
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot size the worker pool")?;
    }
    let exp = Experiment::load(&common.config)?;
    let out = common.out.clone().unwrap_or_else(|| exp.config.output.dir.clone());

    match &cli.command {
        Command::Solve { csv, .. } => commands::solve(&exp, &out, *csv),
        Command::Reconstruct { snapshot, mu, when, .. } => {
            commands::reconstruct(&exp, &out, snapshot, *mu, when.step, when.time)
        }
        Command::Converge { history, .. } => commands::converge(&exp, &out, *history),
        Command::Elasto { .. } => commands::elasto(&exp, &out),
        Command::Dict { mu, step, reference, .. } => {
            commands::dict(&exp, &out, *mu, *step, *reference)
        }
    }
}
