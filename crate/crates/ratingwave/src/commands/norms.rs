use ratingwave_core::norms::{equivalence_check, norm_report, EquivalenceReport, NormReport, DEFAULT_ALPHA};
use serde::Serialize;

use super::{pick, Context, ParamsBlock};
use crate::cli::NormsArgs;
use crate::error::{CliError, CliResult};
use crate::io::{read_pair, Status};

#[derive(Serialize)]
struct Body<'a> {
    #[serde(flatten)]
    params: ParamsBlock<'a>,
    input: String,
    field: &'a str,
    h: f64,
    eta_star: f64,
    norms: NormReport,
    equivalence: EquivalenceReport,
}

pub fn run(ctx: &Context, args: &NormsArgs) -> CliResult<Status> {
    let input = pick(args.input.clone(), &ctx.config.norms.input)
        .ok_or_else(|| CliError::usage("norms needs --input or [norms] input"))?;
    let alpha = pick(args.alpha, &ctx.config.norms.alpha).unwrap_or(DEFAULT_ALPHA);
    if !(0.0..1.0).contains(&alpha) {
        return Err(CliError::usage(format!("alpha must lie in [0, 1) (got {alpha})")));
    }
    let pair = read_pair(&input, &args.field)?;
    let k = &ctx.derived;
    let norms = norm_report(&pair, k, alpha)?;
    let equivalence = equivalence_check(&pair, k)?;
    let name = input.file_name().map_or_else(|| input.display().to_string(), |n| n.to_string_lossy().into_owned());
    let body = Body {
        params: ctx.params_block(),
        input: name,
        field: &args.field,
        h: pair.grid.h(),
        eta_star: pair.grid.eta_star(),
        norms,
        equivalence,
    };
    let text = crate::io::to_json(&crate::io::Report {
        schema_version: crate::io::SCHEMA_VERSION,
        command: "norms",
        status: Status::Ok,
        body: &body,
    })?;
    ctx.out.write_text("norms.json", &text)?;
    print!("{text}");
    Ok(Status::Ok)
}
