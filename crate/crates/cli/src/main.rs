mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use gsd_core::model::Label;

use crate::commands::{output_dir, Run};
use crate::config::{Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "gsd",
    version,
    about = "Phase estimation and ground-state distillation on a two-spin Heisenberg model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Spectrum,
    Ipea,
    Distill,
    Compile,
    Report,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Probe spectrum and peaks per field
    Spectrum(Flags),
    /// Digit-by-digit eigenvalue refinement
    Ipea(Flags),
    /// Ground-state distillation and state metrics
    Distill(Flags),
    /// Pulse programs with a verification report
    Compile(Flags),
    /// All of the above plus a summary
    Report(Flags),
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// JSON run configuration; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "J")]
    j: Option<f64>,
    /// Field values, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    h: Vec<f64>,
    /// Field values as multiples of the critical field, comma separated
    #[arg(long = "h-over-hc", value_delimiter = ',', allow_negative_numbers = true)]
    h_over_hc: Vec<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    /// Sampling step in units of 1/J
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Dephasing time on every qubit, in milliseconds
    #[arg(long = "noise-t2-ms")]
    noise_t2_ms: Option<f64>,
    #[arg(long = "delta-j-rel")]
    delta_j_rel: Option<f64>,
    /// Start from this eigenstate (S, T-1, T0, T+1) instead of the trial state
    #[arg(long)]
    eigenstate: Option<Label>,
    #[arg(long, env = "GSD_OUT_DIR")]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (Kind, Flags) {
        match self {
            Command::Spectrum(f) => (Kind::Spectrum, f),
            Command::Ipea(f) => (Kind::Ipea, f),
            Command::Distill(f) => (Kind::Distill, f),
            Command::Compile(f) => (Kind::Compile, f),
            Command::Report(f) => (Kind::Report, f),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (kind, flags) = cli.command.split();
    let mut config = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(Overrides {
        j: flags.j,
        h: flags.h,
        h_over_hc: flags.h_over_hc,
        iterations: flags.iterations,
        points: flags.points,
        dt: flags.dt,
        seed: flags.seed,
        noise_t2_ms: flags.noise_t2_ms,
        delta_j_rel: flags.delta_j_rel,
        eigenstate: flags.eigenstate,
        out: flags.out,
    });
    let run = Run::new(&config, output_dir(&config).to_path_buf())?;
    match kind {
        Kind::Spectrum => run.spectrum()?,
        Kind::Ipea => run.ipea()?,
        Kind::Distill => run.distill()?,
        Kind::Compile => run.compile()?,
        Kind::Report => run.report()?,
    };
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
