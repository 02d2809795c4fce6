use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dtc::sweep::{self, Figure, RunOptions, SweepConfig};
use dtc::Error;

#[derive(Parser)]
#[command(
    name = "dtc",
    version,
    about = "Discrete time-crystal simulation and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Sweep configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `run.output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `run.workers`.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (θ, τ₁, seed) task and analyze the traces.
    Simulate(Common),
    /// Solve the disorder-averaged mean-field theory over the configured grid.
    Meanfield(Common),
    /// Recompute spectra, fractions, lifetimes and boundaries from stored traces.
    Analyze(Common),
    /// Emit long-format plot tables for one figure.
    Plotdata {
        #[command(flatten)]
        common: Common,
        /// fig1, fig2, fig3 or fig4.
        #[arg(long)]
        figure: String,
    },
    /// Run the invariant suite.
    Verify,
}

fn load(common: &Common) -> Result<SweepConfig, Error> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    SweepConfig::load(path)
}

fn options(common: &Common) -> RunOptions {
    RunOptions {
        out: common.out.clone(),
        workers: common.workers,
        seed: common.seed,
    }
}

fn require_out(common: &Common) -> Result<PathBuf, Error> {
    common
        .out
        .clone()
        .ok_or_else(|| Error::Config("--out is required".into()))
}

fn report(r: sweep::RunReport) -> ExitCode {
    println!(
        "{}: {} tasks, {} failed",
        r.out_dir.display(),
        r.tasks,
        r.failures
    );
    if r.failures > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate(c) => Ok(report(sweep::run_sweep(&load(&c)?, &options(&c))?)),
        Command::Meanfield(c) => Ok(report(sweep::run_meanfield(&load(&c)?, &options(&c))?)),
        Command::Analyze(c) => {
            let config = c
                .config
                .as_ref()
                .map(|p| SweepConfig::load(p))
                .transpose()?;
            Ok(report(sweep::analyze(&require_out(&c)?, config.as_ref())?))
        }
        Command::Plotdata { common, figure } => {
            let figure: Figure = figure.parse()?;
            for p in sweep::emit_plotdata(&require_out(&common)?, figure)? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let results = sweep::run_verify();
            for r in &results {
                println!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            Ok(if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Units { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
