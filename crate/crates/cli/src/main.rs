use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gqnfit_cli::commands::{cmd_basis, cmd_calibrate, cmd_compare, cmd_fit, cmd_simulate};
use gqnfit_cli::{CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "gqnfit", version, about = "GQN-calibrated exact posterior regression")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate latent field, observations and forecast truth.
    Simulate(RunArgs),
    /// Build the space-time basis matrix.
    Basis(RunArgs),
    /// Calibrate K and L against a simulated ensemble.
    Calibrate(RunArgs),
    /// Calibrate, fit and score.
    Fit {
        #[command(flatten)]
        run: RunArgs,
        /// Record wall time of the fit stage in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Merge the reports of two or more fit runs.
    Compare {
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(args: &RunArgs) -> CliResult<(RunConfig, PathBuf)> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set `output`".into()))?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate(a) => {
            let (cfg, out) = load(&a)?;
            cmd_simulate(&cfg, &out)
        }
        Command::Basis(a) => {
            let (cfg, out) = load(&a)?;
            cmd_basis(&cfg, &out)
        }
        Command::Calibrate(a) => {
            let (cfg, out) = load(&a)?;
            cmd_calibrate(&cfg, &out)
        }
        Command::Fit { run, timing } => {
            let (cfg, out) = load(&run)?;
            cmd_fit(&cfg, &out, timing).map(|_| ())
        }
        Command::Compare { runs, out } => cmd_compare(&runs, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
