mod error;
mod run;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use error::CliError;
use run::{run, RunContext};
use scenario::parse_scenario;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    SolveHs,
    SolveParabolic,
    SolveEinstein,
    SolveColliding,
    VerifyRicci,
    VerifyAction,
    Classify,
    Converge,
}

/// Solvers and verifiers for diffractive geometrical optics of gravitational waves.
///
/// Exit codes: 0 success, 1 configuration error, 2 solver blow-up, 3 verification failure.
#[derive(Debug, Parser)]
#[command(name = "gwd", version)]
struct Cli {
    /// Command to run; may instead be given as `command` in the scenario file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// Scenario JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the scenario's `output`; default `gwd-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for random test points and probes (overrides the scenario's `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let name = cli.command.and_then(|c| c.to_possible_value()).map(|v| v.get_name().to_string());
    let file = parse_scenario(&text, name.as_deref())?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let ctx = RunContext {
        out: cli.out.clone().or_else(|| file.output.clone()).unwrap_or_else(|| PathBuf::from("gwd-out")),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        threads: cli.threads,
    };
    log::info!("running {} into {}", file.scenario.command(), ctx.out.display());
    run(&file, &ctx)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GWD_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
