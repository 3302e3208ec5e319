//! Stability classification over a parameter grid.
//!
//! Points are produced in row-major order so callers can evaluate them in any
//! order (or in parallel) and still emit a deterministic table.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::params::SpectralCoefficients;

use super::{
    classify, evaluate_conditions, ClassifyOptions, ConditionValues, Verdict,
};

/// Closed inclusive range sampled at `n` evenly spaced points. `n = 1`
/// samples only `lo`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let a = Self { lo, hi, n };
        a.check()?;
        Ok(a)
    }

    pub fn single(v: f64) -> Self {
        Self { lo: v, hi: v, n: 1 }
    }

    fn check(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.hi < self.lo {
            return Err(Error::InvalidConfig(alloc::format!(
                "axis bounds must be finite and ordered (got [{}, {}])",
                self.lo,
                self.hi
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("axis needs at least one point".into()));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.n == 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }
}

/// Parameter grid: either the two ratios at fixed `delta` or the raw
/// volatilities and discount rate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum SweepGrid {
    Ratios { delta: f64, c_l: Axis, c_h: Axis },
    Volatilities { delta: Axis, sigma_l: Axis, sigma_h: Axis },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub coefficients: SpectralCoefficients,
}

impl SweepGrid {
    fn axes(&self) -> Vec<&Axis> {
        match self {
            SweepGrid::Ratios { c_l, c_h, .. } => alloc::vec![c_l, c_h],
            SweepGrid::Volatilities { delta, sigma_l, sigma_h } => alloc::vec![delta, sigma_l, sigma_h],
        }
    }

    pub fn check(&self) -> Result<()> {
        if let SweepGrid::Ratios { delta, .. } = self {
            if !(*delta > 0.0 && delta.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "delta",
                    requirement: "finite and positive",
                    value: *delta,
                });
            }
        }
        for a in self.axes() {
            a.check()?;
            if !(a.lo > 0.0) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "sweep axes must be positive (got lower bound {})",
                    a.lo
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes().iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points, outermost axis first (`c_L` then `c_H`, or `delta`,
    /// `sigma_L`, `sigma_H`).
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        self.check()?;
        let mut out = Vec::with_capacity(self.len());
        match *self {
            SweepGrid::Ratios { delta, c_l, c_h } => {
                for i in 0..c_l.n {
                    for j in 0..c_h.n {
                        out.push(SweepPoint {
                            index: out.len(),
                            coefficients: SpectralCoefficients::from_ratios(delta, c_h.value(j), c_l.value(i)),
                        });
                    }
                }
            }
            SweepGrid::Volatilities { delta, sigma_l, sigma_h } => {
                for d in 0..delta.n {
                    for i in 0..sigma_l.n {
                        for j in 0..sigma_h.n {
                            out.push(SweepPoint {
                                index: out.len(),
                                coefficients: SpectralCoefficients::new(
                                    delta.value(d),
                                    sigma_h.value(j),
                                    sigma_l.value(i),
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One table row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepRow {
    pub c_l: f64,
    pub c_h: f64,
    pub sigma_h: f64,
    pub sigma_l: f64,
    pub delta: f64,
    pub conditions: ConditionValues,
    pub system_one: [bool; 3],
    pub system_two: [bool; 5],
    pub delta_disc: f64,
    pub c_hl_bound: f64,
    /// Zero count from the contour confirmation, when requested and possible.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub winding: Option<i64>,
    pub verdict: Verdict,
}

/// Classifies one point. With `confirm` the contour count is attached; points
/// whose confirmation rectangle cannot be formed or counted get `None`.
pub fn evaluate_point(k: &SpectralCoefficients, opts: &ClassifyOptions, confirm: bool) -> SweepRow {
    let report = if confirm {
        classify(k, opts).ok()
    } else {
        None
    };
    let winding = report.as_ref().map(|r| r.winding());
    let report = report.unwrap_or_else(|| evaluate_conditions(k, opts.strictness));
    SweepRow {
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
        winding,
        verdict: report.condition_verdict,
    }
}

/// Sequential sweep in grid order.
pub fn sweep(grid: &SweepGrid, opts: &ClassifyOptions, confirm: bool) -> Result<Vec<SweepRow>> {
    Ok(grid
        .points()?
        .iter()
        .map(|p| evaluate_point(&p.coefficients, opts, confirm))
        .collect())
}
