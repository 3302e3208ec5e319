//! Exponentially weighted norms of half-line pairs and exponential-rate fits.
//!
//! A pair `(w_L, w_H)` is measured through the quotients `w_J / q_J`. The
//! second-order norm adds the weighted sups of the first and second
//! differences; derivatives at the interface and at the truncation ends use
//! one-sided stencils because `w` is only piecewise smooth.

use alloc::vec::Vec;
use core::ops::Mul;

use crate::error::{Error, Result};
use crate::grid::HalfLinePair;
use crate::math::{exp, ln, pow};
use crate::params::{DerivedParams, Side};
use crate::tridiag::Scalar;
use crate::C64;

/// Sample types the norms accept.
pub trait Field: Scalar + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl Field for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Field for C64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Fewest nodes per side the difference stencils need.
pub const MIN_NODES: usize = 5;

fn check_nodes<T>(pair: &HalfLinePair<T>) -> Result<()> {
    if pair.low.len() < MIN_NODES || pair.high.len() < MIN_NODES {
        return Err(Error::GridTooCoarse("weighted derivative norms need 5 nodes per side"));
    }
    Ok(())
}

/// First difference along increasing index: centered inside, one-sided
/// three-point at both ends.
fn diff1<T: Field>(v: &[T], h: f64) -> Vec<T> {
    let n = v.len();
    let s = 0.5 / h;
    (0..n)
        .map(|i| {
            if i == 0 {
                (v[1] * 4.0 - v[0] * 3.0 - v[2]) * s
            } else if i == n - 1 {
                (v[n - 1] * 3.0 - v[n - 2] * 4.0 + v[n - 3]) * s
            } else {
                (v[i + 1] - v[i - 1]) * s
            }
        })
        .collect()
}

/// Second difference: centered inside, one-sided four-point at both ends.
fn diff2<T: Field>(v: &[T], h: f64) -> Vec<T> {
    let n = v.len();
    let s = 1.0 / (h * h);
    (0..n)
        .map(|i| {
            if i == 0 {
                (v[0] * 2.0 - v[1] * 5.0 + v[2] * 4.0 - v[3]) * s
            } else if i == n - 1 {
                (v[n - 1] * 2.0 - v[n - 2] * 5.0 + v[n - 3] * 4.0 - v[n - 4]) * s
            } else {
                (v[i + 1] - v[i] * 2.0 + v[i - 1]) * s
            }
        })
        .collect()
}

/// Pointwise first and second differences of both sides.
pub fn derivatives<T: Field>(pair: &HalfLinePair<T>) -> Result<(HalfLinePair<T>, HalfLinePair<T>)> {
    check_nodes(pair)?;
    let h = pair.grid.h();
    let d1 = HalfLinePair {
        grid: pair.grid,
        low: diff1(&pair.low, h),
        high: diff1(&pair.high, h),
    };
    let d2 = HalfLinePair {
        grid: pair.grid,
        low: diff2(&pair.low, h),
        high: diff2(&pair.high, h),
    };
    Ok((d1, d2))
}

fn weighted_sup<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams, side: Side) -> f64 {
    pair.side(side)
        .iter()
        .enumerate()
        .map(|(i, v)| v.magnitude() / k.weight(side, pair.grid.node(side, i)))
        .fold(0.0, f64::max)
}

fn plain_sup<T: Field>(v: &[T]) -> f64 {
    v.iter().map(|x| x.magnitude()).fold(0.0, f64::max)
}

/// `sup |w_L / q_L| + sup |w_H / q_H|`.
pub fn x_norm<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams) -> f64 {
    Side::BOTH.iter().map(|&s| weighted_sup(pair, k, s)).sum()
}

/// Sup norm of one side's quotient only.
pub fn x_norm_side<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams, side: Side) -> f64 {
    weighted_sup(pair, k, side)
}

/// Weighted sups of `w`, `D w` and `D^2 w`, summed.
pub fn x2_norm<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams) -> Result<f64> {
    let (d1, d2) = derivatives(pair)?;
    Ok(x_norm(pair, k) + x_norm(&d1, k) + x_norm(&d2, k))
}

/// The quotients `w_J / q_J`.
pub fn quotient<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams) -> HalfLinePair<T> {
    pair.map(|side, y, v| v * (1.0 / k.weight(side, y)))
}

/// Classical `C^2` norm of the quotients: sups of `z`, `z'`, `z''` per side.
pub fn c2b_norm<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams) -> Result<f64> {
    let z = quotient(pair, k);
    let (d1, d2) = derivatives(&z)?;
    Ok(Side::BOTH
        .iter()
        .map(|&s| plain_sup(z.side(s)) + plain_sup(d1.side(s)) + plain_sup(d2.side(s)))
        .sum())
}

/// Discrete `alpha`-Hölder seminorm of the quotients over node pairs at
/// distance at most 1, summed over sides.
pub fn holder_seminorm<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams, alpha: f64) -> f64 {
    let z = quotient(pair, k);
    let h = pair.grid.h();
    let reach = ((1.0 / h) + 1e-9) as usize;
    let mut total = 0.0;
    for side in Side::BOTH {
        let v = z.side(side);
        let mut best = 0.0f64;
        for i in 0..v.len() {
            for d in 1..=reach.min(v.len() - 1 - i) {
                let q = (v[i + d] - v[i]).magnitude() / pow(d as f64 * h, alpha);
                best = best.max(q);
            }
        }
        total += best;
    }
    total
}

pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NormReport {
    pub x_norm: f64,
    pub x2_norm: f64,
    pub c2b_norm: f64,
    pub holder_alpha: f64,
    pub alpha: f64,
}

pub fn norm_report<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams, alpha: f64) -> Result<NormReport> {
    Ok(NormReport {
        x_norm: x_norm(pair, k),
        x2_norm: x2_norm(pair, k)?,
        c2b_norm: c2b_norm(pair, k)?,
        holder_alpha: holder_seminorm(pair, k, alpha),
        alpha,
    })
}

/// Constant `C` with `c2b / C <= x2 <= C c2b` for the continuous norms.
///
/// From `w = q z`: `w'/q = z' - a z` and `w''/q = z'' - 2a z' + a^2 z`, and
/// the inverse relations with `a` replaced by `-a`, where `a = (c_J - 1)/2`.
pub fn equivalence_constant(k: &DerivedParams) -> f64 {
    Side::BOTH
        .iter()
        .map(|&s| {
            let a = k.weight_exponent(s).abs();
            (1.0 + a + a * a).max(1.0 + 2.0 * a)
        })
        .fold(1.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EquivalenceReport {
    pub x2_norm: f64,
    pub c2b_norm: f64,
    /// `x2 / c2b`; 1 when both vanish.
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    /// Relative allowance for the difference stencils, `h^2 (1 + max|a|)^4`.
    pub slack: f64,
    pub within: bool,
}

pub fn equivalence_check<T: Field>(pair: &HalfLinePair<T>, k: &DerivedParams) -> Result<EquivalenceReport> {
    let x2 = x2_norm(pair, k)?;
    let c2 = c2b_norm(pair, k)?;
    let ratio = if x2 == 0.0 && c2 == 0.0 { 1.0 } else { x2 / c2 };
    let c = equivalence_constant(k);
    let a = k.weight_exponent(Side::Low).abs().max(k.weight_exponent(Side::High).abs());
    let h = pair.grid.h();
    let b = 1.0 + a;
    let slack = h * h * b * b * b * b;
    let within = ratio >= (1.0 - slack) / c && ratio <= c * (1.0 + slack);
    Ok(EquivalenceReport {
        x2_norm: x2,
        c2b_norm: c2,
        ratio,
        lower: 1.0 / c,
        upper: c,
        slack,
        within,
    })
}

/// Least-squares fit of `ln v = intercept - rate t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Fits the samples with `t` inside `window` (inclusive). Every value used
/// must be positive.
pub fn fit_decay(t: &[f64], v: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if t.len() != v.len() {
        return Err(Error::Fit("time and value series differ in length"));
    }
    let (mut n, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut logs = Vec::new();
    for (&ti, &vi) in t.iter().zip(v) {
        if ti < window.0 || ti > window.1 {
            continue;
        }
        if !(vi > 0.0) || !vi.is_finite() {
            return Err(Error::Fit("non-positive value in the fit window"));
        }
        let y = ln(vi);
        logs.push((ti, y));
        n += 1.0;
        st += ti;
        sy += y;
        stt += ti * ti;
        sty += ti * y;
    }
    if logs.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit("fewer than 10 samples in the fit window"));
    }
    let var = stt - st * st / n;
    if !(var > 0.0) {
        return Err(Error::Fit("fit window has no time spread"));
    }
    let slope = (sty - st * sy / n) / var;
    let intercept = (sy - slope * st) / n;
    let mean = sy / n;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(ti, y) in &logs {
        let e = y - (intercept + slope * ti);
        ss_res += e * e;
        ss_tot += (y - mean) * (y - mean);
    }
    // a flat series is fitted perfectly by a zero rate
    let tiny = 64.0 * f64::EPSILON * mean.abs().max(1.0);
    let r_squared = if ss_tot <= tiny * tiny * n {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        rate: -slope,
        intercept,
        r_squared,
        window,
        samples: logs.len(),
    })
}

/// Default window: drop the first 10% of the horizon and stop before the first
/// sample that falls under `1e3 eps` times the initial value.
pub fn default_window(t: &[f64], v: &[f64]) -> Option<(f64, f64)> {
    let (&t0, &t1) = (t.first()?, t.last()?);
    let start = t0 + 0.1 * (t1 - t0);
    let floor = 1e3 * f64::EPSILON * v.first()?.abs();
    let end = t
        .iter()
        .zip(v)
        .find(|(_, &x)| !(x.abs() > floor))
        .map(|(&ti, _)| ti)
        .unwrap_or(t1);
    // exclude the floored sample itself
    let end = t.iter().copied().filter(|&ti| ti < end || end == t1).fold(start, f64::max);
    (end > start).then_some((start, end))
}

/// [`fit_decay`] over [`default_window`].
pub fn fit_decay_auto(t: &[f64], v: &[f64]) -> Result<DecayFit> {
    let w = default_window(t, v).ok_or(Error::Fit("series too short for the default window"))?;
    fit_decay(t, v, w)
}

/// Evaluates `e^{-rate t}` samples, handy for synthetic checks.
pub fn exponential_series(rate: f64, t: &[f64]) -> Vec<f64> {
    t.iter().map(|&ti| exp(-rate * ti)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::params::P0;

    fn setup(h: f64) -> (DerivedParams, Grid) {
        let k = P0.derive().unwrap();
        (k, Grid::with_extent(h, 8.0, 8.0, k.eta_star).unwrap())
    }

    #[test]
    fn weights_have_unit_norm() {
        let (k, g) = setup(0.05);
        let q = HalfLinePair::from_fn(g, |s, y| k.weight(s, y));
        assert!((x_norm(&q, &k) - 2.0).abs() < 1e-14);
        assert_eq!(x_norm(&HalfLinePair::zeros(g), &k), 0.0);
        let left = HalfLinePair::from_fn(g, |s, y| if s == Side::Low { 3.0 * k.weight(s, y) } else { 0.0 });
        assert!((x_norm(&left, &k) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn weight_pair_second_order_norm() {
        let (k, g) = setup(0.001);
        let q = HalfLinePair::from_fn(g, |s, y| k.weight(s, y));
        let expect: f64 = Side::BOTH
            .iter()
            .map(|&s| {
                let a = k.weight_exponent(s).abs();
                1.0 + a + a * a
            })
            .sum();
        assert!((x2_norm(&q, &k).unwrap() - expect).abs() < 1e-5);
        assert!((c2b_norm(&q, &k).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn complex_scaling() {
        let (k, g) = setup(0.05);
        let p = HalfLinePair::from_fn(g, |s, y| C64::new(exp(-(y * y)), 0.3 * y) * k.weight(s, y));
        let s = C64::new(0.6, -0.8) * 2.0;
        let scaled = p.map(|_, _, v| v * s);
        let a = x2_norm(&p, &k).unwrap();
        let b = x2_norm(&scaled, &k).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * a);
    }

    #[test]
    fn holder_of_linear_quotient() {
        let (k, g) = setup(0.01);
        let p = HalfLinePair::from_fn(g, |s, y| y * k.weight(s, y));
        // |y - y'| / |y - y'|^{1/2} peaks at distance 1 on each side
        let v = holder_seminorm(&p, &k, 0.5);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_nodes() {
        let k = P0.derive().unwrap();
        let g = Grid::new(0.1, 4, 4, k.eta_star).unwrap();
        let p = HalfLinePair::from_fn(g, |_, y| y);
        assert!(x2_norm(&p, &k).is_ok());
        let short = HalfLinePair {
            grid: g,
            low: alloc::vec![0.0; 3],
            high: alloc::vec![0.0; 3],
        };
        assert!(matches!(x2_norm(&short, &k), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn exact_and_constant_fits() {
        let t: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let v = exponential_series(0.01, &t);
        let f = fit_decay(&t, &v, (0.0, 199.0)).unwrap();
        assert!((f.rate - 0.01).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let c = alloc::vec![4.2; 200];
        let f = fit_decay(&t, &c, (0.0, 199.0)).unwrap();
        assert!(f.rate.abs() < 1e-15);
        assert_eq!(f.r_squared, 1.0);
        let mut bad = v.clone();
        bad[50] = 0.0;
        assert!(fit_decay(&t, &bad, (0.0, 199.0)).is_err());
        assert!(fit_decay(&t[..5], &v[..5], (0.0, 199.0)).is_err());
    }

    #[test]
    fn default_window_skips_transient_and_floor() {
        let t: Vec<f64> = (0..=1000).map(|i| i as f64).collect();
        let v = exponential_series(0.05, &t);
        let (a, b) = default_window(&t, &v).unwrap();
        assert_eq!(a, 100.0);
        // e^{-0.05 t} hits 1e3 eps near t = 582
        assert!(b > 570.0 && b < 590.0);
        let f = fit_decay_auto(&t, &v).unwrap();
        assert!((f.rate - 0.05).abs() < 1e-9);
    }
}
