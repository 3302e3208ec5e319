//! Dispersion function of the linearized operator, zero counting and the
//! closed-form stability conditions.
//!
//! For `J in {L, H}` the characteristic roots are
//! `mu_J(+-) = -(c_J - 1)/2 +- sqrt((c_J - 1)^2/4 + 2 lambda / sigma_J^2)` with the
//! principal square root, and the dispersion function is
//! `D(lambda) = A - mu_H(-) + mu_L(+)`. Each square root has its branch cut on
//! the real half-line `lambda <= edge_J`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::params::{Side, SpectralCoefficients};
use crate::C64;

pub mod conditions;
pub mod contour;
pub mod poly;
pub mod sweep;

pub use conditions::{ConditionValues, Quadratic, Strictness};
pub use contour::{locate_zeros, winding_number, ContourOptions, Rect, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootSign {
    Plus,
    Minus,
}

/// `(c_J - 1)^2 / 4 + 2 lambda / sigma_J^2`, written as `2 (lambda - edge_J) / sigma_J^2`
/// so it vanishes exactly at the branch point.
pub fn root_argument(k: &SpectralCoefficients, side: Side, lambda: C64) -> C64 {
    let s = k.sigma(side);
    (lambda - k.edge(side)) * (2.0 / (s * s))
}

/// Principal square root of [`root_argument`].
pub fn root_spread(k: &SpectralCoefficients, side: Side, lambda: C64) -> C64 {
    root_argument(k, side, lambda).sqrt()
}

/// Characteristic root `mu_J(sign)` at `lambda`.
pub fn mu(k: &SpectralCoefficients, side: Side, sign: RootSign, lambda: C64) -> C64 {
    let base = -(k.ratio(side) - 1.0) / 2.0;
    let s = root_spread(k, side, lambda);
    match sign {
        RootSign::Plus => s + base,
        RootSign::Minus => -s + base,
    }
}

/// `D(lambda) = A - mu_H(-) + mu_L(+)`.
pub fn dispersion(k: &SpectralCoefficients, lambda: C64) -> C64 {
    mu(k, Side::Low, RootSign::Plus, lambda) - mu(k, Side::High, RootSign::Minus, lambda) + k.a
}

/// `dD/dlambda = 1/(sigma_H^2 s_H) + 1/(sigma_L^2 s_L)`.
pub fn dispersion_derivative(k: &SpectralCoefficients, lambda: C64) -> C64 {
    let h = k.sigma_h * k.sigma_h;
    let l = k.sigma_l * k.sigma_l;
    (root_spread(k, Side::High, lambda) * h).inv() + (root_spread(k, Side::Low, lambda) * l).inv()
}

/// Rejects points on or left of the rightmost branch point.
pub fn check_right_of_edge(k: &SpectralCoefficients, lambda: C64) -> Result<()> {
    let edge = k.spectrum_edge();
    if !(lambda.re > edge) || !lambda.im.is_finite() {
        return Err(Error::BranchCut {
            re: lambda.re,
            im: lambda.im,
            edge,
        });
    }
    Ok(())
}

/// Winding count and refined zeros of `D` on one rectangle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RootSearch {
    pub rect: Rect,
    pub winding: i64,
    pub roots: Vec<Zero>,
}

/// Counts and refines the zeros of `D` inside `rect`, which must lie strictly
/// right of both branch points.
pub fn root_search(k: &SpectralCoefficients, rect: &Rect, opts: &ContourOptions) -> Result<RootSearch> {
    if !rect.is_degenerate() {
        check_right_of_edge(k, C64::new(rect.re_min, 0.0))?;
    }
    let f = |z: C64| Ok(dispersion(k, z));
    let df = |z: C64| Ok(dispersion_derivative(k, z));
    let (winding, roots) = contour::locate_zeros(&f, &df, rect, opts)?;
    Ok(RootSearch {
        rect: *rect,
        winding,
        roots,
    })
}

/// Which closed-form system is satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Verdict {
    SpectrallyStable,
    PotentiallyUnstableSystemOne,
    PotentiallyUnstableSystemTwo,
    PotentiallyUnstableBoth,
}

impl Verdict {
    pub fn from_systems(one: bool, two: bool) -> Self {
        match (one, two) {
            (false, false) => Verdict::SpectrallyStable,
            (true, false) => Verdict::PotentiallyUnstableSystemOne,
            (false, true) => Verdict::PotentiallyUnstableSystemTwo,
            (true, true) => Verdict::PotentiallyUnstableBoth,
        }
    }

    pub fn is_stable(&self) -> bool {
        *self == Verdict::SpectrallyStable
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::SpectrallyStable => "spectrally-stable",
            Verdict::PotentiallyUnstableSystemOne => "potentially-unstable:system-one",
            Verdict::PotentiallyUnstableSystemTwo => "potentially-unstable:system-two",
            Verdict::PotentiallyUnstableBoth => "potentially-unstable:both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Half-size `R` of the confirmation rectangle `[edge/2, R] x [-R, R]`.
    pub radius: f64,
    pub strictness: Strictness,
    pub contour: ContourOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            radius: 50.0,
            strictness: Strictness::AsPrinted,
            contour: ContourOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpectrumReport {
    pub essential_edge: f64,
    pub winding_counts: Vec<(Rect, i64)>,
    pub roots: Vec<Zero>,
    pub conditions: ConditionValues,
    pub system_one: [bool; 3],
    pub system_two: [bool; 5],
    pub condition_verdict: Verdict,
    pub c_hl_bound: f64,
    /// `B^2 - 4 X^2 R` from the long factored formula.
    pub delta_disc: f64,
    /// The same quantity from the exactly derived coefficient tables.
    pub delta_disc_tables: f64,
    /// Textbook discriminant of the quadratic, `4 (B^2 + 4 X^2 R)`.
    pub standard_discriminant: f64,
}

impl SpectrumReport {
    pub fn winding(&self) -> i64 {
        self.winding_counts.iter().map(|(_, n)| n).sum()
    }
}

/// Closed-form quantities only (no contour work).
pub fn evaluate_conditions(k: &SpectralCoefficients, strictness: Strictness) -> SpectrumReport {
    let values = ConditionValues::evaluate(k);
    let tables = poly::SquaringTables::derive();
    let system_one = values.system_one_tests(strictness);
    let system_two = values.system_two_tests(strictness);
    let quad = Quadratic::expanded(k);
    SpectrumReport {
        essential_edge: k.spectrum_edge(),
        winding_counts: Vec::new(),
        roots: Vec::new(),
        conditions: values,
        system_one,
        system_two,
        condition_verdict: Verdict::from_systems(
            system_one.iter().all(|&b| b),
            system_two.iter().all(|&b| b),
        ),
        c_hl_bound: conditions::real_part_bound(k),
        delta_disc: values.system_two[4],
        delta_disc_tables: Quadratic::from_tables(k, &tables).delta(),
        standard_discriminant: quad.standard_discriminant(),
    }
}

/// Default confirmation rectangle `[edge/2, R] x [-R, R]`.
pub fn confirmation_rect(k: &SpectralCoefficients, radius: f64) -> Result<Rect> {
    let edge = k.spectrum_edge();
    if !(edge < 0.0) {
        return Err(Error::BranchCut { re: edge, im: 0.0, edge });
    }
    Rect::new(edge / 2.0, radius, -radius, radius)
}

/// Root search on `rect`; if `D` nearly vanishes on the boundary the bounds are
/// jittered deterministically and the search repeated.
pub fn root_search_jittered(k: &SpectralCoefficients, rect: &Rect, opts: &ContourOptions) -> Result<RootSearch> {
    const JITTER: [f64; 4] = [0.0, 0.0131, -0.0217, 0.0373];
    let mut err = None;
    for j in JITTER {
        let w = rect.re_max - rect.re_min;
        let h = rect.im_max - rect.im_min;
        let trial = Rect {
            re_min: rect.re_min + j.abs() * 0.1 * (rect.re_min.abs().min(w)),
            re_max: rect.re_max * (1.0 + j),
            im_min: rect.im_min - j * 0.5 * h,
            im_max: rect.im_max + j * 0.5 * h * 1.1,
        };
        match root_search(k, &trial, opts) {
            Ok(r) => return Ok(r),
            Err(e @ (Error::ZeroOnContour { .. } | Error::ContourRefinement { .. })) => err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(err.unwrap_or(Error::ContourRefinement {
        re: rect.re_min,
        im: rect.im_min,
    }))
}

/// Closed-form verdict plus an argument-principle confirmation over
/// `[edge/2, R] x [-R, R]`.
pub fn classify(k: &SpectralCoefficients, opts: &ClassifyOptions) -> Result<SpectrumReport> {
    let mut report = evaluate_conditions(k, opts.strictness);
    let rect = confirmation_rect(k, opts.radius)?;
    let search = root_search_jittered(k, &rect, &opts.contour)?;
    report.winding_counts.push((search.rect, search.winding));
    report.roots = search.roots;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::P0;

    fn k0() -> SpectralCoefficients {
        P0.spectral().unwrap()
    }

    #[test]
    fn roots_at_zero() {
        let k = k0();
        let z = C64::new(0.0, 0.0);
        assert!((mu(&k, Side::Low, RootSign::Plus, z) - 0.375).norm() < 1e-15);
        assert!((mu(&k, Side::High, RootSign::Minus, z) + 1.5).norm() < 1e-15);
        assert!((dispersion(&k, z) - 3.0).norm() < 1e-14);
    }

    #[test]
    fn large_lambda_growth() {
        let k = k0();
        for l in [1e3, 1e4, 1e6] {
            assert!(dispersion(&k, C64::new(l, 0.0)).norm() > l.sqrt() / k.sigma_l);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let k = k0();
        let z = C64::new(0.7, -3.2);
        assert!((dispersion(&k, z.conj()) - dispersion(&k, z).conj()).norm() < 1e-14);
    }

    #[test]
    fn derivative_matches_difference() {
        let k = k0();
        let z = C64::new(0.3, 1.1);
        let h = 1e-6;
        let fd = (dispersion(&k, z + h) - dispersion(&k, z - h)) / (2.0 * h);
        assert!((fd - dispersion_derivative(&k, z)).norm() < 1e-7);
    }

    #[test]
    fn p0_rectangle_has_no_zeros() {
        let k = k0();
        let r = Rect::new(0.0, 5.0, -5.0, 5.0).unwrap();
        let s = root_search(&k, &r, &ContourOptions::default()).unwrap();
        assert_eq!(s.winding, 0);
        assert!(s.roots.is_empty());
    }

    #[test]
    fn branch_cut_rectangles_are_refused() {
        let k = k0();
        let r = Rect::new(-0.01, 5.0, -5.0, 5.0).unwrap();
        assert!(matches!(
            root_search(&k, &r, &ContourOptions::default()),
            Err(Error::BranchCut { .. })
        ));
    }

    #[test]
    fn p0_is_spectrally_stable() {
        let rep = classify(&k0(), &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.condition_verdict, Verdict::SpectrallyStable);
        assert_eq!(rep.winding(), 0);
        assert!((rep.delta_disc - rep.delta_disc_tables).abs() <= 1e-9 * rep.delta_disc.abs());
    }

    #[test]
    fn finds_zero_left_of_axis_outside_domain() {
        // c_H << c_L < 1: a real zero sits just left of the imaginary axis.
        let k = SpectralCoefficients::from_ratios(0.05, 0.001, 0.55);
        let rep = classify(&k, &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.winding(), 1);
        assert_eq!(rep.roots.len(), 1);
        let z = rep.roots[0].value;
        assert!(dispersion(&k, z).norm() < 1e-10);
        assert!(z.re < 0.0 && z.re > k.spectrum_edge() && z.im.abs() < 1e-12);
    }
}
