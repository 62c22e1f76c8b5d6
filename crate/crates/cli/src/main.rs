use std::path::PathBuf;
use std::process::ExitCode;

use caputo_cli::config::parse_seeds;
use caputo_cli::{bench, bifurcate, load_config, precision, solve, verify, CliError, Overrides};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

/// Fractional Adams-Bashforth-Moulton solver for Caputo systems.
#[derive(Debug, Parser)]
#[command(name = "caputo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in system: lcr or linear.
    #[arg(long, global = true, value_name = "NAME")]
    system: Option<String>,
    #[arg(long, global = true, value_name = "P")]
    workers: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    steps: Option<usize>,
    #[arg(long, global = true, value_name = "T")]
    horizon: Option<f64>,
    /// balanced or static.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// f64 or extended (f32 also accepted).
    #[arg(long, global = true)]
    precision: Option<String>,
    /// Output CSV; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write every K-th step.
    #[arg(long, global = true, value_name = "K")]
    stride: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the configured system and write the trajectory.
    Solve,
    /// Convergence check against the Mittag-Leffler solution of D^a y = -y.
    Verify,
    /// Time solves over step and worker counts.
    Bench,
    /// Strobe the forced circuit over a range of forcing amplitudes.
    Bifurcate(BifurcateArgs),
    /// Compare 64-bit and extended-precision runs.
    Precision,
}

#[derive(Debug, Args)]
struct BifurcateArgs {
    #[arg(long)]
    f_start: Option<f64>,
    #[arg(long)]
    f_end: Option<f64>,
    #[arg(long)]
    f_count: Option<usize>,
    /// Fraction of steps discarded before strobing.
    #[arg(long)]
    transient_frac: Option<f64>,
    /// Starting points as `x,y;x,y`.
    #[arg(long)]
    seeds: Option<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = Overrides {
        system: cli.system,
        workers: cli.workers,
        steps: cli.steps,
        horizon: cli.horizon,
        mode: cli.mode,
        precision: cli.precision,
        out: cli.out,
        stride: cli.stride,
        ..Overrides::default()
    };
    if let Command::Bifurcate(args) = &cli.command {
        overrides.f_start = args.f_start;
        overrides.f_end = args.f_end;
        overrides.f_count = args.f_count;
        overrides.transient_frac = args.transient_frac;
        overrides.seeds = args
            .seeds
            .as_deref()
            .map(parse_seeds)
            .transpose()
            .map_err(|e| CliError::Usage(format!("--seeds: {e}")))?;
    }
    let config = load_config(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Solve => solve(&config),
        Command::Verify => verify(&config),
        Command::Bench => bench(&config),
        Command::Bifurcate(_) => bifurcate(&config),
        Command::Precision => precision(&config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
