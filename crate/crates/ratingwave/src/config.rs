//! TOML run configuration. Every section is optional and every key inside a
//! section is optional; unknown keys are rejected. Values given on the command
//! line override the file, which overrides the preset and built-in defaults.

use std::path::{Path, PathBuf};

use ratingwave_core::dispersion::sweep::{Axis, SweepGrid};
use ratingwave_core::dispersion::Strictness;
use ratingwave_core::params::{self, FinancialParams};
use serde::Deserialize;

use crate::error::{io_err, CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub params: Option<FinancialParams>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub formulation: FormulationSection,
    #[serde(default)]
    pub wave: WaveSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub resolvent: ResolventSection,
    #[serde(default)]
    pub norms: NormsSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub h: Option<f64>,
    #[serde(rename = "L_left")]
    pub l_left: Option<f64>,
    #[serde(rename = "L_right")]
    pub l_right: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub record_interval: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Zero,
    Bump,
    WeightedBump,
    CustomCsv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub kind: Option<InitKind>,
    pub amplitude: Option<f64>,
    pub width: Option<f64>,
    /// CSV with columns `y, v_left, v_right` (custom-csv only).
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FormulationChoice {
    U,
    W,
    Both,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulationSection {
    pub kind: Option<FormulationChoice>,
    pub nonlinear: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    /// `lo:hi:step`.
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// `re_min,re_max,im_min,im_max`.
    pub rect: Option<String>,
    pub radius: Option<f64>,
    pub segments: Option<usize>,
    pub strictness: Option<Strictness>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub grid: Option<SweepGrid>,
    pub confirm: Option<bool>,
    pub threads: Option<usize>,
    pub radius: Option<f64>,
    pub strictness: Option<Strictness>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventSection {
    /// `re,im`.
    pub lambda: Option<String>,
    pub probe: Option<String>,
    /// Jump datum of the interface condition.
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    pub input: Option<PathBuf>,
    pub alpha: Option<f64>,
}

impl RunConfig {
    /// Reads `path` and resolves relative paths inside it against the file's
    /// directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.out, &mut cfg.init.path, &mut cfg.norms.input].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Model parameters by precedence: command-line preset, config `[params]`,
/// config preset, then the reference set.
pub fn resolve_params(cli_preset: Option<&str>, cfg: &RunConfig) -> CliResult<FinancialParams> {
    let named = |name: &str| {
        params::preset(name).ok_or_else(|| {
            CliError::usage(format!("unknown preset `{name}` (known: {})", params::preset_list()))
        })
    };
    let p = match (cli_preset, cfg.params, cfg.preset.as_deref()) {
        (Some(name), _, _) => named(name)?,
        (None, Some(p), _) => p,
        (None, None, Some(name)) => named(name)?,
        (None, None, None) => params::P0,
    };
    p.derive()?;
    Ok(p)
}

fn numbers(s: &str, sep: char, n: usize, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(sep).map(str::trim).collect();
    if parts.len() != n {
        return Err(CliError::usage(format!("{what}: expected {n} values separated by `{sep}`, got `{s}`")));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::usage(format!("{what}: `{p}` is not a finite number")))
        })
        .collect()
}

/// `lo:hi:step` into the node list `lo, lo + step, ..` up to `hi` inclusive.
pub fn parse_range(s: &str) -> CliResult<Vec<f64>> {
    let v = numbers(s, ':', 3, "grid")?;
    let (lo, hi, step) = (v[0], v[1], v[2]);
    if !(step > 0.0) || hi < lo {
        return Err(CliError::usage(format!("grid `{s}` needs lo <= hi and step > 0")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(CliError::usage(format!("grid `{s}` has too many points")));
    }
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// `lo:hi:n` sweep axis.
pub fn parse_axis(s: &str) -> CliResult<Axis> {
    let v = numbers(s, ':', 3, "axis")?;
    if !(v[2] >= 1.0 && v[2].fract() == 0.0) {
        return Err(CliError::usage(format!("axis `{s}`: the point count must be a positive integer")));
    }
    Ok(Axis::new(v[0], v[1], v[2] as usize)?)
}

/// `re,im`.
pub fn parse_complex(s: &str) -> CliResult<(f64, f64)> {
    let v = numbers(s, ',', 2, "lambda")?;
    Ok((v[0], v[1]))
}

/// `re_min,re_max,im_min,im_max`.
pub fn parse_rect(s: &str) -> CliResult<[f64; 4]> {
    let v = numbers(s, ',', 4, "rect")?;
    Ok([v[0], v[1], v[2], v[3]])
}
