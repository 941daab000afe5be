#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod check;
mod commands;
mod config;

use config::RunConfig;

/// Gauge integrals of vector functions and of the segment-valued
/// multifunctions they determine.
#[derive(Parser, Debug)]
#[command(name = "setgauge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for randomized commands; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a convergence loop and write result.json and convergence.csv.
    Integrate(Common),
    /// Run a worked example and write report.txt and report.csv.
    Demo {
        id: DemoId,
        #[command(flatten)]
        common: Common,
    },
    /// Build a δ-fine partition and write partition.csv.
    Partition(Common),
    /// Run a randomized property sweep and write check.csv.
    Check(Common),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum DemoId {
    EOverT,
    OrthonormalH,
    DerivativeHenstock,
    GlimRoundtrip,
}

/// Exit status of a finished run.
pub enum Status {
    Ok,
    NonConvergent,
    Failed,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let common = match &cli.command {
        Command::Integrate(c) | Command::Partition(c) | Command::Check(c) => c,
        Command::Demo { common, .. } => common,
    };
    let cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    std::fs::create_dir_all(&common.out)?;
    match &cli.command {
        Command::Integrate(c) => commands::integrate(&cfg, &c.out),
        Command::Demo { id, common } => commands::demo(&cfg, *id, common.seed, &common.out),
        Command::Partition(c) => commands::partition(&cfg, &c.out),
        Command::Check(c) => check::run(&cfg, c.seed, &c.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NonConvergent) => ExitCode::from(2),
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
