use ratingwave_core::{Side, WaveProfile};
use serde::Serialize;

use super::{pick, Context, ParamsBlock};
use crate::cli::WaveArgs;
use crate::config::parse_range;
use crate::error::CliResult;
use crate::io::{num, Status};

pub const DEFAULT_GRID: &str = "-20:20:0.01";

const HEADER: [&str; 6] = ["y", "K", "Kprime_left", "Kprime_right", "Ksecond_left", "Ksecond_right"];

#[derive(Serialize)]
struct Body<'a> {
    #[serde(flatten)]
    params: ParamsBlock<'a>,
    grid: &'a str,
    points: usize,
    interface_level: f64,
    interface_slope: f64,
    curvature_jump: f64,
    /// Largest `|L K|` over the sample points off the interface.
    max_ode_residual: f64,
    csv: &'static str,
}

pub fn run(ctx: &Context, args: &WaveArgs) -> CliResult<Status> {
    let spec = pick(args.grid.clone(), &ctx.config.wave.grid).unwrap_or_else(|| DEFAULT_GRID.to_string());
    let ys = parse_range(&spec)?;
    let wave = WaveProfile::new(ctx.derived);
    let eta = ctx.derived.eta_star;
    let mut rows = Vec::with_capacity(ys.len());
    let mut residual = 0.0f64;
    for &y in &ys {
        // one-sided limits: the left limit at the interface uses the low branch
        let left = if y <= eta { Side::Low } else { Side::High };
        let right = if y < eta { Side::Low } else { Side::High };
        if y != eta {
            residual = residual.max(wave.ode_residual_on(wave.side_of(y), y).abs());
        }
        rows.push(vec![
            num(y, "y")?,
            num(wave.value(y), "K")?,
            num(wave.slope(left, y), "Kprime_left")?,
            num(wave.slope(right, y), "Kprime_right")?,
            num(wave.curvature(left, y), "Ksecond_left")?,
            num(wave.curvature(right, y), "Ksecond_right")?,
        ]);
    }
    ctx.out.write_csv("wave.csv", &HEADER, &rows)?;
    ctx.report(
        "wave",
        Status::Ok,
        Body {
            params: ctx.params_block(),
            grid: &spec,
            points: ys.len(),
            interface_level: ctx.derived.interface_level,
            interface_slope: wave.slope_at_interface(),
            curvature_jump: wave.curvature_jump(),
            max_ode_residual: residual,
            csv: "wave.csv",
        },
    )?;
    println!("wave: {} points -> {}", ys.len(), ctx.out.path("wave.csv").display());
    Ok(Status::Ok)
}
