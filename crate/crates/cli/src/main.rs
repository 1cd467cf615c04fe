use std::path::PathBuf;
use std::process::ExitCode;

use arrowlab_cli::config::OutputFormat;
use arrowlab_cli::{run, CliError, CommandConfig, CommandKind, Overrides};
use clap::{Args, Parser, Subcommand};

/// Two-time boundary condition experiments on finite phase spaces.
#[derive(Parser)]
#[command(name = "arrowlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy of the bounded distribution over a (p, s) grid.
    EntropyScan(Common),
    /// Two-time versus perfect-mixing distribution for one problem.
    TwoTime(Common),
    /// Backward posterior over past macrostates.
    Retrodict(Common),
    /// Formula-versus-oracle and Monte Carlo campaigns.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Also write an SVG plot (entropy-scan only).
    #[arg(long)]
    svg: bool,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("ARROWLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Invalid(format!(
                "ARROWLAB_THREADS={value:?} is not a positive integer"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (kind, common) = match cli.command {
        Command::EntropyScan(c) => (CommandKind::EntropyScan, c),
        Command::TwoTime(c) => (CommandKind::TwoTime, c),
        Command::Retrodict(c) => (CommandKind::Retrodict, c),
        Command::OracleCheck(c) => (CommandKind::OracleCheck, c),
    };
    let mut config = match &common.config {
        Some(path) => CommandConfig::load(kind, path)?,
        None => CommandConfig::default_for(kind),
    };
    config.apply(&Overrides {
        seed: common.seed,
        out: common.out,
        svg: common.svg,
        format: common.format,
    })?;
    let manifest = run(&config)?;
    for output in &manifest.outputs {
        println!("{}", config.output_dir().join(&output.file).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
