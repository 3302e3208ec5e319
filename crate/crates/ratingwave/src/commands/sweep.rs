use ratingwave_core::dispersion::sweep::{evaluate_point, Axis, SweepGrid, SweepRow};
use ratingwave_core::dispersion::{ClassifyOptions, Strictness};
use rayon::prelude::*;
use serde::Serialize;

use super::spectrum::{csv_row, options, HEADER};
use super::{pick, Context};
use crate::cli::SweepArgs;
use crate::config::parse_axis;
use crate::error::{CliError, CliResult};
use crate::io::Status;

/// Upper bound on worker threads when none is requested.
pub const MAX_DEFAULT_THREADS: usize = 8;

fn default_grid() -> SweepGrid {
    SweepGrid::Ratios {
        delta: 0.05,
        c_l: Axis { lo: 0.05, hi: 0.95, n: 19 },
        c_h: Axis { lo: 1.1, hi: 3.0, n: 20 },
    }
}

#[derive(Serialize)]
struct Body {
    grid: SweepGrid,
    points: usize,
    confirmed: bool,
    strictness: Strictness,
    stable: usize,
    potentially_unstable: usize,
    /// Points whose contour count is nonzero.
    nonzero_winding: usize,
    /// Points where the contour count could not be made.
    unconfirmed: usize,
    seed: u64,
    csv: &'static str,
}

/// Evaluates every grid point on a bounded pool; the result keeps grid order
/// whatever the thread count.
pub fn evaluate(grid: &SweepGrid, opts: &ClassifyOptions, confirm: bool, threads: usize) -> CliResult<Vec<SweepRow>> {
    let points = grid.points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|p| evaluate_point(&p.coefficients, opts, confirm))
            .collect()
    }))
}

pub fn run(ctx: &Context, args: &SweepArgs) -> CliResult<Status> {
    let cfg = &ctx.config.sweep;
    let grid = match (&args.c_l, &args.c_h) {
        (Some(l), Some(h)) => SweepGrid::Ratios {
            delta: args.delta.unwrap_or(ctx.params.delta),
            c_l: parse_axis(l)?,
            c_h: parse_axis(h)?,
        },
        (None, None) => {
            let mut g = cfg.grid.unwrap_or_else(default_grid);
            if let (Some(d), SweepGrid::Ratios { delta, .. }) = (args.delta, &mut g) {
                *delta = d;
            }
            g
        }
        _ => return Err(CliError::usage("--c-l and --c-h go together")),
    };
    grid.check()?;
    let opts = options(
        pick(args.radius, &cfg.radius),
        None,
        pick(args.strictness.map(Into::into), &cfg.strictness),
    )?;
    let confirm = !args.no_confirm && cfg.confirm.unwrap_or(true);
    let threads = match pick(args.threads, &cfg.threads) {
        Some(0) => return Err(CliError::usage("threads must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()).min(MAX_DEFAULT_THREADS),
    };
    let rows = evaluate(&grid, &opts, confirm, threads)?;
    let csv: Vec<Vec<String>> = rows.iter().map(csv_row).collect::<CliResult<_>>()?;
    ctx.out.write_csv("sweep.csv", &HEADER, &csv)?;
    let stable = rows.iter().filter(|r| r.verdict.is_stable()).count();
    let body = Body {
        grid,
        points: rows.len(),
        confirmed: confirm,
        strictness: opts.strictness,
        stable,
        potentially_unstable: rows.len() - stable,
        nonzero_winding: rows.iter().filter(|r| r.winding.is_some_and(|w| w != 0)).count(),
        unconfirmed: if confirm { rows.iter().filter(|r| r.winding.is_none()).count() } else { rows.len() },
        seed: ctx.seed,
        csv: "sweep.csv",
    };
    ctx.report("sweep", Status::Ok, body)?;
    println!("sweep: {} points, {stable} spectrally stable", rows.len());
    Ok(Status::Ok)
}
