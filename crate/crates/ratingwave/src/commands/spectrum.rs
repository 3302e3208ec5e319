use ratingwave_core::dispersion::sweep::SweepRow;
use ratingwave_core::dispersion::{
    classify, evaluate_conditions, root_search_jittered, ClassifyOptions, Rect, SpectrumReport, Strictness,
};
use serde::Serialize;

use super::{pick, Context, ParamsBlock};
use crate::cli::SpectrumArgs;
use crate::config::parse_rect;
use crate::error::{CliError, CliResult};
use crate::io::{num, Status};

/// Column order shared by `spectrum` and `sweep`.
pub const HEADER: [&str; 17] = [
    "c_L", "c_H", "sigma_H", "sigma_L", "delta", "cond1_1", "cond1_2", "cond1_3", "cond2_1", "cond2_2", "cond2_3",
    "cond2_4", "cond2_5", "Delta", "c_HL_bound", "winding", "verdict",
];

/// One CSV row; `winding` is left empty when no count was made.
pub fn csv_row(r: &SweepRow) -> CliResult<Vec<String>> {
    let mut row = Vec::with_capacity(17);
    for (x, name) in [
        (r.c_l, "c_L"),
        (r.c_h, "c_H"),
        (r.sigma_h, "sigma_H"),
        (r.sigma_l, "sigma_L"),
        (r.delta, "delta"),
    ] {
        row.push(num(x, name)?);
    }
    for x in r.conditions.system_one.iter().chain(&r.conditions.system_two) {
        row.push(num(*x, "condition")?);
    }
    row.push(num(r.delta_disc, "Delta")?);
    row.push(num(r.c_hl_bound, "c_HL_bound")?);
    row.push(r.winding.map(|w| w.to_string()).unwrap_or_default());
    row.push(r.verdict.label().to_string());
    Ok(row)
}

pub(crate) fn options(
    radius: Option<f64>,
    segments: Option<usize>,
    strictness: Option<Strictness>,
) -> CliResult<ClassifyOptions> {
    let mut opts = ClassifyOptions::default();
    if let Some(r) = radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::usage("radius must be finite and positive"));
        }
        opts.radius = r;
    }
    if let Some(n) = segments {
        if n < 4 {
            return Err(CliError::usage("segments must be at least 4"));
        }
        opts.contour.initial_segments = n;
    }
    if let Some(s) = strictness {
        opts.strictness = s;
    }
    Ok(opts)
}

#[derive(Serialize)]
struct Body<'a> {
    #[serde(flatten)]
    params: ParamsBlock<'a>,
    winding: i64,
    verdict: &'static str,
    strictness: Strictness,
    report: &'a SpectrumReport,
    csv: &'static str,
}

pub fn run(ctx: &Context, args: &SpectrumArgs) -> CliResult<Status> {
    let cfg = &ctx.config.spectrum;
    let opts = options(
        pick(args.radius, &cfg.radius),
        pick(args.segments, &cfg.segments),
        pick(args.strictness.map(Into::into), &cfg.strictness),
    )?;
    let rect = match pick(args.rect.clone(), &cfg.rect) {
        Some(s) => {
            let [a, b, c, d] = parse_rect(&s)?;
            Some(Rect::new(a, b, c, d)?)
        }
        None => None,
    };
    let k = ctx.derived.spectral();
    let report = match rect {
        Some(rect) => {
            let mut report = evaluate_conditions(&k, opts.strictness);
            let search = root_search_jittered(&k, &rect, &opts.contour)?;
            report.winding_counts.push((search.rect, search.winding));
            report.roots = search.roots;
            report
        }
        None => classify(&k, &opts)?,
    };
    let winding = report.winding();
    let row = SweepRow {
        c_l: k.c_l,
        c_h: k.c_h,
        sigma_h: k.sigma_h,
        sigma_l: k.sigma_l,
        delta: k.delta,
        conditions: report.conditions,
        system_one: report.system_one,
        system_two: report.system_two,
        delta_disc: report.delta_disc,
        c_hl_bound: report.c_hl_bound,
        winding: Some(winding),
        verdict: report.condition_verdict,
    };
    ctx.out.write_csv("spectrum.csv", &HEADER, &[csv_row(&row)?])?;
    let verdict = report.condition_verdict.label();
    ctx.report(
        "spectrum",
        Status::Ok,
        Body {
            params: ctx.params_block(),
            winding,
            verdict,
            strictness: opts.strictness,
            report: &report,
            csv: "spectrum.csv",
        },
    )?;
    println!("spectrum: winding {winding}, {verdict}");
    Ok(Status::Ok)
}
