//! Subcommand implementations and the dispatcher that maps their outcome to
//! an exit code.

mod norms;
mod resolvent;
mod simulate;
mod spectrum;
mod sweep;
mod wave;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use ratingwave_core::{DerivedParams, FinancialParams};
use serde::Serialize;

use crate::cli::{Cli, Command};
use crate::config::{resolve_params, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{OutDir, Report, Status};

pub use resolvent::random_probe;
pub use simulate::build_sim_config;

/// Output directory used when neither the command line nor the config names one.
pub const DEFAULT_OUT: &str = "out";

/// Inputs shared by every subcommand, resolved before any computation.
pub struct Context {
    pub params: FinancialParams,
    pub derived: DerivedParams,
    pub config: RunConfig,
    pub out: OutDir,
    pub seed: u64,
}

impl Context {
    /// Writes `<command>.json` with the common envelope.
    pub fn report<T: Serialize>(&self, command: &str, status: Status, body: T) -> CliResult<PathBuf> {
        self.out.write_json(
            &format!("{command}.json"),
            &Report {
                schema_version: crate::io::SCHEMA_VERSION,
                command,
                status,
                body,
            },
        )
    }
}

/// Parameters as they appear in every report.
#[derive(Serialize)]
pub struct ParamsBlock<'a> {
    pub params: &'a FinancialParams,
    pub derived: &'a DerivedParams,
    pub seed: u64,
}

impl Context {
    pub fn params_block(&self) -> ParamsBlock<'_> {
        ParamsBlock {
            params: &self.params,
            derived: &self.derived,
            seed: self.seed,
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    #[serde(flatten)]
    params: ParamsBlock<'a>,
    error: String,
}

fn context(cli: &Cli) -> CliResult<Context> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let params = resolve_params(cli.preset.as_deref(), &config)?;
    let derived = params.derive()?;
    let out = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let out = OutDir::create(&out)?;
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    Ok(Context {
        params,
        derived,
        config,
        out,
        seed,
    })
}

fn execute(cli: &Cli, ctx: &Context) -> CliResult<Status> {
    match &cli.command {
        Command::Wave(a) => wave::run(ctx, a),
        Command::Spectrum(a) => spectrum::run(ctx, a),
        Command::Sweep(a) => sweep::run(ctx, a),
        Command::Resolvent(a) => resolvent::run(ctx, a),
        Command::Simulate(a) => simulate::run(ctx, a),
        Command::Norms(a) => norms::run(ctx, a),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code: 0 on success, 1 on invalid input, 2 on numerical failure or failed
/// checks. A JSON report is written for 0 and 2.
pub fn dispatch<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let command = cli.command.name();
    let ctx = match context(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match execute(&cli, &ctx) {
        Ok(Status::Ok) => 0,
        Ok(_) => {
            eprintln!("{command}: checks failed; see {}", ctx.out.path(&format!("{command}.json")).display());
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                let body = ErrorBody {
                    params: ctx.params_block(),
                    error: e.to_string(),
                };
                if let Err(w) = ctx.report(command, Status::Error, body) {
                    eprintln!("error: could not write the report: {w}");
                    return 1;
                }
            }
            e.exit_code()
        }
    }
}

/// Overrides from the command line win over the config file.
pub(crate) fn pick<T: Clone>(cli: Option<T>, cfg: &Option<T>) -> Option<T> {
    cli.or_else(|| cfg.clone())
}

pub(crate) fn require_finite(x: f64, name: &str) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::usage(format!("`{name}` must be finite")))
    }
}
