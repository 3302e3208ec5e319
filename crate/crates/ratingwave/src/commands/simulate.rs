use ratingwave_core::params::FinancialParams;
use ratingwave_core::sim::{Formulation, InitialData, SimConfig, SimTrace};
use ratingwave_core::{HalfLinePair, WaveProfile};
use serde::Serialize;

use super::{Context, ParamsBlock};
use crate::cli::SimulateArgs;
use crate::config::{FormulationChoice, InitKind, RunConfig};
use crate::error::CliResult;
use crate::io::{num, pair_rows, read_pair, resample, Status};
use crate::run::{self, analyze, cross_distance, snapshot_for, CrossDistance, RunAnalysis, DIAGNOSTIC_SNAPSHOTS};

/// Command-line defaults: the reference run.
pub const DEFAULT_HORIZON: f64 = 3000.0;
pub const DEFAULT_AMPLITUDE: f64 = 1e-3;
pub const DEFAULT_WIDTH: f64 = 1.0;

/// Simulation settings from config and flags (flags win), plus the requested
/// formulations.
pub fn build_sim_config(
    params: FinancialParams,
    cfg: &RunConfig,
    args: &SimulateArgs,
) -> CliResult<(SimConfig, Vec<Formulation>)> {
    let choice = args.formulation.or(cfg.formulation.kind).unwrap_or(FormulationChoice::W);
    let forms = match choice {
        FormulationChoice::U => vec![Formulation::U],
        FormulationChoice::W => vec![Formulation::W],
        FormulationChoice::Both => vec![Formulation::U, Formulation::W],
    };
    let amplitude = args.amplitude.or(cfg.init.amplitude).unwrap_or(DEFAULT_AMPLITUDE);
    let width = cfg.init.width.unwrap_or(DEFAULT_WIDTH);
    let kind = args.init.or(cfg.init.kind).unwrap_or(InitKind::WeightedBump);
    let mut c = SimConfig::new(params, forms[0], InitialData::Zero);
    c.h = args.h.or(cfg.grid.h).unwrap_or(c.h);
    c.l_low = cfg.grid.l_left.unwrap_or(c.l_low);
    c.l_high = cfg.grid.l_right.unwrap_or(c.l_high);
    c.dt = args.dt.or(cfg.time.dt).unwrap_or(c.dt);
    c.horizon = args.horizon.or(cfg.time.horizon).unwrap_or(DEFAULT_HORIZON);
    c.snapshot_times = cfg.time.snapshot_times.clone().unwrap_or_default();
    c.record_interval = cfg.time.record_interval.unwrap_or_else(|| (c.horizon / 1000.0).max(0.0));
    c.nonlinear = !args.linear && cfg.formulation.nonlinear.unwrap_or(true);
    c.initial = match kind {
        InitKind::Zero => InitialData::Zero,
        InitKind::Bump => InitialData::Bump { amplitude, width },
        InitKind::WeightedBump => InitialData::WeightedBump { amplitude, width },
        InitKind::CustomCsv => {
            let path = cfg
                .init
                .path
                .as_ref()
                .ok_or_else(|| crate::error::CliError::usage("[init] kind = \"custom-csv\" needs `path`"))?;
            let data = read_pair(path, "v")?;
            let k = params.derive()?;
            let grid = c.grid(&k)?;
            InitialData::Custom(scale(&resample(&data, grid), amplitude, cfg.init.amplitude.is_some() || args.amplitude.is_some()))
        }
    };
    Ok((c, forms))
}

/// Custom data is used as given unless an amplitude was set explicitly.
fn scale(p: &HalfLinePair<f64>, amplitude: f64, explicit: bool) -> HalfLinePair<f64> {
    if explicit {
        p.map(|_, _, v| amplitude * v)
    } else {
        p.clone()
    }
}

#[derive(Serialize)]
struct SnapshotFile {
    formulation: Formulation,
    requested: f64,
    t: f64,
    eta: f64,
    file: String,
}

#[derive(Serialize)]
struct Settings {
    h: f64,
    l_low: f64,
    l_high: f64,
    dt: f64,
    horizon: f64,
    record_interval: f64,
    nonlinear: bool,
    initial: &'static str,
}

#[derive(Serialize)]
struct Body<'a> {
    #[serde(flatten)]
    params: ParamsBlock<'a>,
    settings: Settings,
    runs: Vec<RunAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross: Option<CrossDistance>,
    traces: Vec<String>,
    snapshots: Vec<SnapshotFile>,
}

fn tag(f: Formulation) -> &'static str {
    match f {
        Formulation::U => "u",
        Formulation::W => "w",
    }
}

fn write_trace(ctx: &Context, trace: &SimTrace) -> CliResult<String> {
    let name = format!("trace_{}.csv", tag(trace.formulation));
    let rows = trace
        .records
        .iter()
        .map(|r| {
            Ok(vec![
                num(r.t, "t")?,
                num(r.eta, "eta")?,
                num(r.norm_w, "norm_w")?,
                num(r.norm_v, "norm_v")?,
                num(r.w_at_interface, "w_at_interface")?,
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    ctx.out.write_csv(&name, &["t", "eta", "norm_w", "norm_v", "w_at_interface"], &rows)?;
    Ok(name)
}

fn write_snapshots(ctx: &Context, config: &SimConfig, trace: &SimTrace) -> CliResult<Vec<SnapshotFile>> {
    let wave = WaveProfile::new(trace.derived);
    let mut requested = config.snapshot_times.clone();
    requested.sort_by(f64::total_cmp);
    let mut files = Vec::new();
    for (i, &t) in requested.iter().enumerate() {
        let Some(s) = snapshot_for(trace, t, config.dt) else { continue };
        let u = s.v.map(|side, y, v| wave.value_on(side, y) + v);
        let (header, rows) = pair_rows(&[("w", &s.w), ("v", &s.v), ("u", &u)])?;
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let file = format!("snapshot_{}_{i:03}.csv", tag(trace.formulation));
        ctx.out.write_csv(&file, &header, &rows)?;
        files.push(SnapshotFile {
            formulation: trace.formulation,
            requested: t,
            t: s.t,
            eta: s.eta,
            file,
        });
    }
    Ok(files)
}

pub fn run(ctx: &Context, args: &SimulateArgs) -> CliResult<Status> {
    let (config, forms) = build_sim_config(ctx.params, &ctx.config, args)?;
    let mut traces = Vec::new();
    for &form in &forms {
        let mut c = config.clone();
        c.formulation = form;
        traces.push(run::run(&c, DIAGNOSTIC_SNAPSHOTS)?);
    }
    let mut runs = Vec::new();
    let mut trace_files = Vec::new();
    let mut snapshots = Vec::new();
    for tr in &traces {
        runs.push(analyze(tr));
        trace_files.push(write_trace(ctx, tr)?);
        snapshots.extend(write_snapshots(ctx, &config, tr)?);
    }
    let cross = match traces.as_slice() {
        [a, b] => Some(cross_distance(a, b)?),
        _ => None,
    };
    let passed = runs.iter().all(RunAnalysis::passed);
    let status = if passed { Status::Ok } else { Status::Failed };
    let settings = Settings {
        h: config.h,
        l_low: config.l_low,
        l_high: config.l_high,
        dt: config.dt,
        horizon: config.horizon,
        record_interval: config.record_interval,
        nonlinear: config.nonlinear,
        initial: match config.initial {
            InitialData::Zero => "zero",
            InitialData::Bump { .. } => "bump",
            InitialData::WeightedBump { .. } => "weighted-bump",
            InitialData::Custom(_) => "custom-csv",
        },
    };
    ctx.report(
        "simulate",
        status,
        Body {
            params: ctx.params_block(),
            settings,
            runs,
            cross,
            traces: trace_files,
            snapshots,
        },
    )?;
    for tr in &traces {
        match &tr.abort {
            Some(a) => eprintln!("simulate ({}): stopped at t = {}: {}", tag(tr.formulation), a.t, a.error),
            None => println!("simulate ({}): reached t = {}", tag(tr.formulation), tr.horizon()),
        }
    }
    Ok(status)
}
