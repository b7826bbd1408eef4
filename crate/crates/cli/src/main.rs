//! `phonon-bec`: runs one experiment from a JSON config and writes CSV
//! tables, a JSON summary and a manifest to the output directory.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical divergence,
//! 4 verification failure, 1 i/o error.

mod artifacts;
mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Command;
use config::ExperimentConfig;
use failure::Failure;

/// Output directory override, below `--out` and above the config's `output.directory`.
const OUT_ENV: &str = "PHONON_BEC_OUT";

#[derive(Debug, Parser)]
#[command(name = "phonon-bec", version, about = "Hubbard-phonon decoupling and phonon BEC experiments")]
struct Args {
    /// JSON experiment config; omitted keys take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (default `out`).
    #[arg(long, value_name = "DIR", env = OUT_ENV)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, value_name = "NAME")]
    command: Command,

    /// Dotted-path override such as `thermodynamics.temperature=0.5`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for independent sweep points.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<Vec<String>, Failure> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Validation(format!("--threads: {e}")))?;
    }
    let cfg = ExperimentConfig::load(args.config.as_deref(), &args.overrides)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let art = commands::run(args.command, &cfg)?;
    art.write(&dir, args.command.name(), &cfg)?;
    Ok(art.failures)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(failures) if failures.is_empty() => {
            println!("{}: all checks passed", args.command.name());
            ExitCode::SUCCESS
        }
        Ok(failures) => {
            let f = Failure::Verification(failures.join(", "));
            eprintln!("{}: {f}", args.command.name());
            f.exit_code()
        }
        Err(f) => {
            eprintln!("{}: {f}", args.command.name());
            f.exit_code()
        }
    }
}
