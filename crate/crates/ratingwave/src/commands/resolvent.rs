use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratingwave_core::norms::x_norm;
use ratingwave_core::resolvent::{direct_solve, resolvent_apply, resolvent_residual, Probe, ResidualReport};
use ratingwave_core::{DerivedParams, Grid, HalfLinePair, C64};
use serde::Serialize;

use super::{pick, require_finite, Context, ParamsBlock};
use crate::cli::ResolventArgs;
use crate::config::parse_complex;
use crate::error::{CliError, CliResult};
use crate::io::Status;
use crate::run::Check;

pub const DEFAULT_H: f64 = 0.01;
pub const DEFAULT_LENGTH: f64 = 20.0;

/// Interface and residual tolerances, scaled by `1 + ||f||`.
pub const CONTINUITY_TOL: f64 = 1e-9;
pub const JUMP_TOL: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-6;

/// Probe data named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProbeChoice {
    Family { index: usize, probe: Probe },
    Weights,
    Random { probe: Probe },
}

impl ProbeChoice {
    pub fn parse(s: &str, seed: u64) -> CliResult<Self> {
        match s {
            "weights" => Ok(ProbeChoice::Weights),
            "random" => Ok(ProbeChoice::Random { probe: random_probe(&mut ChaCha8Rng::seed_from_u64(seed)) }),
            _ => {
                let index: usize = s
                    .parse()
                    .ok()
                    .filter(|&i| i < Probe::FAMILY.len())
                    .ok_or_else(|| CliError::usage(format!("probe `{s}`: expected 0-3, `weights` or `random`")))?;
                Ok(ProbeChoice::Family { index, probe: Probe::FAMILY[index] })
            }
        }
    }

    pub fn sample(&self, k: &DerivedParams, grid: Grid) -> HalfLinePair<C64> {
        match self {
            ProbeChoice::Family { probe, .. } | ProbeChoice::Random { probe } => probe.sample(k, grid),
            ProbeChoice::Weights => HalfLinePair::from_fn(grid, |side, y| C64::new(k.weight(side, y), 0.0)),
        }
    }
}

/// Weighted Gaussian bump with random centre, width and side amplitudes.
pub fn random_probe<R: Rng>(rng: &mut R) -> Probe {
    Probe {
        offset: rng.random_range(-2.0..2.0),
        width: rng.random_range(0.3..1.5),
        amplitude_low: rng.random_range(-1.0..1.0),
        amplitude_high: rng.random_range(-1.0..1.0),
    }
}

#[derive(Serialize)]
struct Body<'a> {
    #[serde(flatten)]
    params: ParamsBlock<'a>,
    lambda: C64,
    probe: ProbeChoice,
    a: f64,
    h: f64,
    length: f64,
    c1: C64,
    d1: C64,
    dispersion: C64,
    continuity_defect: f64,
    jump_defect: f64,
    tail_bound: f64,
    residual_report: ResidualReport,
    norm_f: f64,
    norm_w: f64,
    /// `||w|| / ||f||` in the weighted sup norm.
    norm_ratio: f64,
    /// `|lambda|` times `norm_ratio`.
    scaled_ratio: f64,
    /// Weighted distance to the second-order finite-difference solve.
    direct_distance: f64,
    checks: Vec<Check>,
}

fn check(name: &str, value: f64, threshold: f64) -> Check {
    Check {
        name: name.into(),
        value: Some(value),
        threshold,
        passed: value < threshold,
    }
}

pub fn run(ctx: &Context, args: &ResolventArgs) -> CliResult<Status> {
    let cfg = &ctx.config.resolvent;
    let (re, im) = match pick(args.lambda.clone(), &cfg.lambda) {
        Some(s) => parse_complex(&s)?,
        None => (1.0, 0.0),
    };
    let lambda = C64::new(re, im);
    let probe = ProbeChoice::parse(&pick(args.probe.clone(), &cfg.probe).unwrap_or_else(|| "2".into()), ctx.seed)?;
    let a = require_finite(pick(args.a, &cfg.a).unwrap_or(0.0), "a")?;
    let h = args.h.or(ctx.config.grid.h).unwrap_or(DEFAULT_H);
    let (l_low, l_high) = match args.length {
        Some(l) => (l, l),
        None => (
            ctx.config.grid.l_left.unwrap_or(DEFAULT_LENGTH),
            ctx.config.grid.l_right.unwrap_or(DEFAULT_LENGTH),
        ),
    };
    let k = &ctx.derived;
    let grid = Grid::with_extent(h, l_low, l_high, k.eta_star)?;
    let f = probe.sample(k, grid);
    let out = resolvent_apply(k, lambda, &f, a)?;
    let residual = resolvent_residual(k, lambda, &f, &out.w)?;
    let direct = direct_solve(k, lambda, &f, a)?;
    let direct_distance = x_norm(&out.w.zip_with(&direct, |x, y| x - y)?, k);
    let norm_f = x_norm(&f, k);
    let norm_w = x_norm(&out.w, k);
    let ratio = if norm_f > 0.0 { norm_w / norm_f } else { 0.0 };
    let scale = 1.0 + norm_f;
    let checks = vec![
        check("continuity", out.continuity_defect, CONTINUITY_TOL * scale),
        check("jump", out.jump_defect, JUMP_TOL * scale),
        check("residual", residual.max(), RESIDUAL_TOL * scale),
    ];
    let status = if checks.iter().all(|c| c.passed) { Status::Ok } else { Status::Failed };
    ctx.report(
        "resolvent",
        status,
        Body {
            params: ctx.params_block(),
            lambda,
            probe,
            a,
            h,
            length: l_low.max(l_high),
            c1: out.c1,
            d1: out.d1,
            dispersion: out.dispersion,
            continuity_defect: out.continuity_defect,
            jump_defect: out.jump_defect,
            tail_bound: out.tail_bound,
            residual_report: residual,
            norm_f,
            norm_w,
            norm_ratio: ratio,
            scaled_ratio: lambda.norm() * ratio,
            direct_distance,
            checks,
        },
    )?;
    println!("resolvent: |lambda| ratio {:.6e}, residual {:.3e}", lambda.norm() * ratio, residual.max());
    Ok(status)
}
