//! `dual-orlicz`: compute, solve, verify and export from a TOML instance file.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Options};
use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "dual-orlicz", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Instance file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Number of multistart solves for the uniqueness report.
    #[arg(long, global = true)]
    multistart: Option<usize>,
    /// Exit 0 even if the solver does not converge.
    #[arg(long, global = true)]
    allow_soft: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Quermassintegral and per-facet curvature masses.
    Compute,
    /// Solve the discrete problem for `[measure]`.
    Solve,
    /// Run the check suite.
    Verify,
    /// Write `[polytope]` as OFF and TOML.
    Export,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Parse(anyhow::anyhow!("--config is required")))?;
    let cfg = RunConfig::load(path).map_err(Failure::Parse)?;
    let opts = Options {
        out: cli.out.clone(),
        seed: cli.seed,
        multistart: cli.multistart,
        allow_soft: cli.allow_soft,
    };
    match cli.command {
        Command::Compute => commands::compute(&cfg, &opts),
        Command::Solve => commands::solve_cmd(&cfg, &opts).map(|_| ()),
        Command::Verify => commands::verify_cmd(&cfg, &opts),
        Command::Export => commands::export(&cfg, &opts),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code() as u8)
        }
    }
}
