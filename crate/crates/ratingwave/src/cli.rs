use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ratingwave_core::dispersion::Strictness;

use crate::config::{FormulationChoice, InitKind};

#[derive(Debug, Parser)]
#[command(
    name = "ratingwave",
    version,
    about = "Traveling-wave stability toolkit for a two-regime credit-rating migration model",
    arg_required_else_help = true
)]
pub struct Cli {
    /// Named parameter set (P0, near-cH3, near-cL1).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing; default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized probes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the steady wave and its one-sided derivatives.
    Wave(WaveArgs),
    /// Closed-form conditions and zero count of the dispersion function.
    Spectrum(SpectrumArgs),
    /// Stability classification over a parameter grid.
    Sweep(SweepArgs),
    /// Apply the explicit resolvent to a probe.
    Resolvent(ResolventArgs),
    /// Run the front-fixed simulation and fit decay rates.
    Simulate(SimulateArgs),
    /// Weighted norms of a snapshot CSV.
    Norms(NormsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Wave(_) => "wave",
            Command::Spectrum(_) => "spectrum",
            Command::Sweep(_) => "sweep",
            Command::Resolvent(_) => "resolvent",
            Command::Simulate(_) => "simulate",
            Command::Norms(_) => "norms",
        }
    }
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    /// Sample points as `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Search rectangle `re_min,re_max,im_min,im_max`; default is the
    /// confirmation rectangle right of half the spectrum edge.
    #[arg(long, allow_hyphen_values = true)]
    pub rect: Option<String>,
    /// Half-size of the default confirmation rectangle.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Contour segments per edge before refinement.
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long, value_enum)]
    pub strictness: Option<StrictnessArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum StrictnessArg {
    AsPrinted,
    AllStrict,
    AllNonStrict,
}

impl From<StrictnessArg> for Strictness {
    fn from(s: StrictnessArg) -> Self {
        match s {
            StrictnessArg::AsPrinted => Strictness::AsPrinted,
            StrictnessArg::AllStrict => Strictness::AllStrict,
            StrictnessArg::AllNonStrict => Strictness::AllNonStrict,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Fixed discount rate of a ratio sweep.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Low-regime ratio axis `lo:hi:n`.
    #[arg(long = "c-l")]
    pub c_l: Option<String>,
    /// High-regime ratio axis `lo:hi:n`.
    #[arg(long = "c-h")]
    pub c_h: Option<String>,
    /// Worker threads (default: available parallelism, at most 8).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Skip the contour confirmation.
    #[arg(long)]
    pub no_confirm: bool,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum)]
    pub strictness: Option<StrictnessArg>,
}

#[derive(Debug, Args)]
pub struct ResolventArgs {
    /// Spectral parameter `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// `0`-`3` (probe family member), `weights` or `random` (seeded).
    #[arg(long)]
    pub probe: Option<String>,
    /// Jump datum of the interface condition.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Half-line length on both sides.
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationChoice>,
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    /// Drop the nonlinear terms.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    /// Snapshot CSV as written by `simulate`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Field prefix of the value columns.
    #[arg(long, default_value = "w")]
    pub field: String,
    /// Hoelder exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
}
