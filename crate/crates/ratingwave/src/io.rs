//! Output directory handling, versioned JSON reports and the CSV formats.

use std::fs;
use std::path::{Path, PathBuf};

use ratingwave_core::{Grid, HalfLinePair, Side};
use serde::Serialize;
use serde_json::Value;

use crate::error::{io_err, CliError, CliResult};

/// Bumped whenever a report field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

/// Envelope of every JSON report.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub status: Status,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Finished and every check passed.
    Ok,
    /// Finished, but a check failed or the run aborted.
    Failed,
    /// A numerical error stopped the command.
    Error,
}

/// Serializes `report`. Reports never contain `null` on purpose (optional
/// fields are skipped), so a `null` can only come from a non-finite float
/// and is rejected.
pub fn to_json<T: Serialize>(report: &T) -> CliResult<String> {
    let value = serde_json::to_value(report)?;
    if let Some(path) = find_null(&value, String::new()) {
        return Err(CliError::NonFinite(path));
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

fn find_null(v: &Value, path: String) -> Option<String> {
    match v {
        Value::Null => Some(if path.is_empty() { "<root>".into() } else { path }),
        Value::Array(items) => items.iter().enumerate().find_map(|(i, x)| find_null(x, format!("{path}[{i}]"))),
        Value::Object(map) => map.iter().find_map(|(k, x)| {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            find_null(x, p)
        }),
        _ => None,
    }
}

/// Formats a finite float with Rust's shortest round-trip `Display`.
pub fn num(x: f64, column: &str) -> CliResult<String> {
    if x.is_finite() {
        Ok(x.to_string())
    } else {
        Err(CliError::NonFinite(column.to_string()))
    }
}

/// The output directory, created before any computation starts.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(io_err(root))?;
        let root = fs::canonicalize(root).map_err(io_err(root))?;
        Ok(Self { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let p = self.path(name);
        fs::write(&p, text).map_err(io_err(&p))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, report: &T) -> CliResult<PathBuf> {
        let text = to_json(report)?;
        self.write_text(name, &text)
    }

    /// Writes `header` and `rows`; every row must match the header length.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let p = self.path(name);
        let csv_err = |source| CliError::Csv { path: p.clone(), source };
        let mut w = csv::Writer::from_path(&p).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(&p))?;
        Ok(p)
    }
}

/// Rows `y, <a>_left, <a>_right, ...` for fields on a common grid. Nodes left
/// of the interface fill only the `_left` columns, nodes right of it only the
/// `_right` columns, and the interface row fills both.
pub fn pair_rows(fields: &[(&str, &HalfLinePair<f64>)]) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let grid = fields.first().map(|f| f.1.grid).ok_or_else(|| CliError::usage("no fields to write"))?;
    if fields.iter().any(|f| f.1.grid != grid) {
        return Err(CliError::usage("fields are on different grids"));
    }
    let mut header = vec!["y".to_string()];
    for (name, _) in fields {
        header.push(format!("{name}_left"));
        header.push(format!("{name}_right"));
    }
    let n_low = grid.len(Side::Low);
    let n_high = grid.len(Side::High);
    let mut rows = Vec::with_capacity(n_low + n_high - 1);
    for i in 0..n_low + n_high - 1 {
        let low = (i < n_low).then_some(i);
        let high = (i + 1 >= n_low).then(|| i + 1 - n_low);
        let y = match (low, high) {
            (Some(j), _) => grid.node(Side::Low, j),
            (None, Some(j)) => grid.node(Side::High, j),
            _ => unreachable!(),
        };
        let mut row = vec![num(y, "y")?];
        for (name, p) in fields {
            for (side, j) in [(Side::Low, low), (Side::High, high)] {
                row.push(match j {
                    Some(j) => num(p.side(side)[j], name)?,
                    None => String::new(),
                });
            }
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Reads the `<name>_left` / `<name>_right` columns written by [`pair_rows`]
/// back into a pair. The grid spacing and interface are inferred from `y` and
/// must be uniform.
pub fn read_pair(path: &Path, name: &str) -> CliResult<HalfLinePair<f64>> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = r.headers().map_err(csv_err)?.clone();
    let col = |c: &str| {
        headers
            .iter()
            .position(|h| h.trim() == c)
            .ok_or_else(|| CliError::usage(format!("{}: missing column `{c}`", path.display())))
    };
    let (iy, il, ir) = (col("y")?, col(&format!("{name}_left"))?, col(&format!("{name}_right"))?);
    let mut low = Vec::new();
    let mut high = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let cell = |i: usize| -> CliResult<Option<f64>> {
            let s = rec.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| CliError::usage(format!("{}: `{s}` is not a finite number", path.display())))
        };
        let y = cell(iy)?.ok_or_else(|| CliError::usage(format!("{}: empty `y` cell", path.display())))?;
        if let Some(v) = cell(il)? {
            low.push((y, v));
        }
        if let Some(v) = cell(ir)? {
            high.push((y, v));
        }
    }
    low.sort_by(|a, b| a.0.total_cmp(&b.0));
    high.sort_by(|a, b| a.0.total_cmp(&b.0));
    let bad = |msg: &str| CliError::usage(format!("{}: {msg}", path.display()));
    let (Some(&(eta, _)), Some(&(last_low, _))) = (high.first(), low.last()) else {
        return Err(bad("both sides need values"));
    };
    if low.len() < 2 || high.len() < 2 {
        return Err(bad("each side needs at least two nodes"));
    }
    let h = (high.last().unwrap().0 - eta) / (high.len() - 1) as f64;
    let tol = 1e-6 * h;
    if (last_low - eta).abs() > tol {
        return Err(bad("the last left node and the first right node must share the interface"));
    }
    let uniform = |pts: &[(f64, f64)], start: f64| {
        pts.iter().enumerate().all(|(i, p)| (p.0 - (start + i as f64 * h)).abs() <= tol * (1.0 + i as f64))
    };
    let first = eta - (low.len() - 1) as f64 * h;
    if !uniform(&low, first) || !uniform(&high, eta) {
        return Err(bad("nodes are not uniformly spaced"));
    }
    let grid = Grid::new(h, low.len() - 1, high.len() - 1, eta)?;
    Ok(HalfLinePair::new(
        grid,
        low.into_iter().map(|p| p.1).collect(),
        high.into_iter().map(|p| p.1).collect(),
    )?)
}

/// Linear interpolation of `p` onto `grid`, side by side. Nodes outside the
/// data take the value 0.
pub fn resample(p: &HalfLinePair<f64>, grid: Grid) -> HalfLinePair<f64> {
    if p.grid == grid {
        return p.clone();
    }
    let src = p.grid;
    HalfLinePair::from_fn(grid, |side, y| {
        let v = p.side(side);
        let pos = (y - src.node(side, 0)) / src.h();
        let last = (v.len() - 1) as f64;
        if pos < -1e-9 || pos > last + 1e-9 {
            return 0.0;
        }
        let pos = pos.clamp(0.0, last);
        let i = (pos as usize).min(v.len() - 2);
        let th = pos - i as f64;
        v[i] + th * (v[i + 1] - v[i])
    })
}
