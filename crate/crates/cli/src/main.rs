#![allow(clippy::neg_cmp_op_on_partial_ord)]
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod output;
mod run;

use run::Experiment;

/// Failure reported to the shell. The exit code separates bad input (2)
/// from numerical checks that missed their tolerance (3).
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        Self { code: 2, message }
    }

    pub fn tolerance(message: String) -> Self {
        Self { code: 3, message }
    }

    pub fn io(message: String) -> Self {
        Self { code: 1, message }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser)]
#[command(name = "friedrichs", version, about = "Scattering and time-delay experiments for finite-rank Friedrichs models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// S-matrix, its derivative and the delay density on an energy grid.
    Smatrix(Common),
    /// Sojourn-time sweep over the localization radius with extrapolation.
    TimedelaySweep(Common),
    /// Propagation functional of the state, closed form against direct.
    Propagation(Common),
    /// Spectral shift density and its relation to the scattering phase.
    SpectralShift(Common),
    /// Scan for embedded eigenvalues.
    PointSpectrum(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validate the configuration and exit without computing.
    #[arg(long)]
    check: bool,
}

fn execute(which: Experiment, args: &Common) -> Result<(), CliError> {
    let (cfg, base) = config::load(&args.config)?;
    let assembled = config::assemble(&cfg, &base)?;
    for w in &assembled.warnings {
        log::warn!("{w}");
    }
    run::check(&cfg, &assembled, which)?;
    if args.check {
        println!("configuration ok");
        return Ok(());
    }
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.directory.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| PathBuf::from("output").join(which.name()));
    let mut artifacts = output::Artifacts::new(&dir, cfg.output.precision)?;
    let ok = run::run(&cfg, &assembled, which, &mut artifacts)?;
    let written = artifacts.finish()?;
    for path in written {
        println!("{}", path.display());
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::tolerance("one or more checks failed; see summary.txt".into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (which, args) = match &cli.command {
        Command::Smatrix(a) => (Experiment::Smatrix, a),
        Command::TimedelaySweep(a) => (Experiment::TimedelaySweep, a),
        Command::Propagation(a) => (Experiment::Propagation, a),
        Command::SpectralShift(a) => (Experiment::SpectralShift, a),
        Command::PointSpectrum(a) => (Experiment::PointSpectrum, a),
    };
    match execute(which, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
