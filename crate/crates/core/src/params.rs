//! Model parameters, the admissible domain and every derived constant.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math::{exp, ln, sqrt};

/// Which half-line a quantity belongs to. `Low` is the low-grade region
/// `y <= eta*` (volatility `sigma_L`), `High` is `y >= eta*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Low,
    High,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Low, Side::High];
}

/// Raw model inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FinancialParams {
    /// Credit discount rate.
    pub delta: f64,
    /// Threshold proportion in (0, 1).
    pub gamma: f64,
    /// Risk-free rate.
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(rename = "sigma_H"))]
    pub sigma_h: f64,
    #[cfg_attr(feature = "serde", serde(rename = "sigma_L"))]
    pub sigma_l: f64,
}

/// Named inequality of the admissible domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `sigma_H^2 / 2 < delta` fails.
    DeltaNotAboveHighVariance,
    /// `delta < sigma_L^2 / 2` fails.
    DeltaNotBelowLowVariance,
    /// `c_H <= 3` fails.
    HighRatioAboveThree,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::DeltaNotAboveHighVariance => "delta > sigma_H^2/2 violated",
            Violation::DeltaNotBelowLowVariance => "delta < sigma_L^2/2 violated",
            Violation::HighRatioAboveThree => "c_H <= 3 violated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityVerdict {
    pub violations: Vec<Violation>,
}

impl AdmissibilityVerdict {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for AdmissibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("admissible");
        }
        f.write_str("inadmissible: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// `c_J = 2 delta / sigma_J^2`.
pub fn volatility_ratio(delta: f64, sigma: f64) -> f64 {
    2.0 * delta / (sigma * sigma)
}

/// Branch point of the characteristic roots on one side: `-sigma^2 (c - 1)^2 / 8`.
pub fn branch_point(sigma: f64, ratio: f64) -> f64 {
    let d = ratio - 1.0;
    -sigma * sigma * d * d / 8.0
}

impl FinancialParams {
    pub const fn new(delta: f64, gamma: f64, r: f64, sigma_h: f64, sigma_l: f64) -> Self {
        Self {
            delta,
            gamma,
            r,
            sigma_h,
            sigma_l,
        }
    }

    /// Field-level checks: finite, strictly positive, `gamma < 1`.
    pub fn check_fields(&self) -> Result<()> {
        let fields = [
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("r", self.r),
            ("sigma_H", self.sigma_h),
            ("sigma_L", self.sigma_l),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    requirement: "finite and > 0",
                    value,
                });
            }
        }
        if self.gamma >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                requirement: "< 1",
                value: self.gamma,
            });
        }
        Ok(())
    }

    pub fn c_h(&self) -> f64 {
        volatility_ratio(self.delta, self.sigma_h)
    }

    pub fn c_l(&self) -> f64 {
        volatility_ratio(self.delta, self.sigma_l)
    }

    /// Lists every violated inequality of the admissible domain.
    pub fn validate(&self) -> Result<AdmissibilityVerdict> {
        self.check_fields()?;
        let mut violations = Vec::new();
        if !(self.sigma_h * self.sigma_h / 2.0 < self.delta) {
            violations.push(Violation::DeltaNotAboveHighVariance);
        }
        if !(self.delta < self.sigma_l * self.sigma_l / 2.0) {
            violations.push(Violation::DeltaNotBelowLowVariance);
        }
        if self.c_h() > 3.0 {
            violations.push(Violation::HighRatioAboveThree);
        }
        Ok(AdmissibilityVerdict { violations })
    }

    /// Spectral coefficients; defined for any positive input, admissible or not.
    pub fn spectral(&self) -> Result<SpectralCoefficients> {
        self.check_fields()?;
        Ok(SpectralCoefficients::new(self.delta, self.sigma_h, self.sigma_l))
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        let verdict = self.validate()?;
        if !verdict.is_admissible() {
            return Err(Error::Inadmissible(alloc::format!("{verdict}")));
        }
        Ok(DerivedParams::from_admissible(*self))
    }
}

/// The subset of constants that the dispersion relation needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCoefficients {
    pub delta: f64,
    pub sigma_h: f64,
    pub sigma_l: f64,
    pub c_h: f64,
    pub c_l: f64,
    /// Coupling constant of the jump condition, `(1 - c_L)(c_H / c_L - 1)`.
    pub a: f64,
    pub edge_h: f64,
    pub edge_l: f64,
}

impl SpectralCoefficients {
    pub fn new(delta: f64, sigma_h: f64, sigma_l: f64) -> Self {
        let c_h = volatility_ratio(delta, sigma_h);
        let c_l = volatility_ratio(delta, sigma_l);
        let sh2 = sigma_h * sigma_h;
        let sl2 = sigma_l * sigma_l;
        Self {
            delta,
            sigma_h,
            sigma_l,
            c_h,
            c_l,
            a: (1.0 - c_l) * (sl2 - sh2) / sh2,
            edge_h: branch_point(sigma_h, c_h),
            edge_l: branch_point(sigma_l, c_l),
        }
    }

    /// Builds coefficients straight from the ratios (sweeps over `(c_L, c_H)`).
    pub fn from_ratios(delta: f64, c_h: f64, c_l: f64) -> Self {
        let mut k = Self::new(delta, sqrt(2.0 * delta / c_h), sqrt(2.0 * delta / c_l));
        // keep the requested ratios exactly rather than their round trip
        k.c_h = c_h;
        k.c_l = c_l;
        k.a = (1.0 - c_l) * (c_h / c_l - 1.0);
        k
    }

    pub fn sigma(&self, side: Side) -> f64 {
        match side {
            Side::Low => self.sigma_l,
            Side::High => self.sigma_h,
        }
    }

    pub fn ratio(&self, side: Side) -> f64 {
        match side {
            Side::Low => self.c_l,
            Side::High => self.c_h,
        }
    }

    pub fn edge(&self, side: Side) -> f64 {
        match side {
            Side::Low => self.edge_l,
            Side::High => self.edge_h,
        }
    }

    pub fn spectrum_edge(&self) -> f64 {
        self.edge_l.max(self.edge_h)
    }
}

/// Everything computable from admissible [`FinancialParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DerivedParams {
    #[cfg_attr(feature = "serde", serde(skip))]
    pub params: FinancialParams,
    #[cfg_attr(feature = "serde", serde(rename = "c_H"))]
    pub c_h: f64,
    #[cfg_attr(feature = "serde", serde(rename = "c_L"))]
    pub c_l: f64,
    /// Wave speed `r - delta`.
    pub c: f64,
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub a: f64,
    pub eta_star: f64,
    /// `ln(1 - c_L)`, left end of the invertibility interval of the interface map.
    pub x0: f64,
    #[cfg_attr(feature = "serde", serde(rename = "edge_L"))]
    pub edge_l: f64,
    #[cfg_attr(feature = "serde", serde(rename = "edge_H"))]
    pub edge_h: f64,
    pub spectrum_edge: f64,
    /// Alternative halfline endpoint `-min(c_J^2 (c_J^2 - 1)^2 / 8)`, reported for comparison only.
    pub edge_alternative: f64,
    /// `gamma e^{eta*}`, the wave value at the interface.
    pub interface_level: f64,
}

impl DerivedParams {
    fn from_admissible(p: FinancialParams) -> Self {
        let spec = SpectralCoefficients::new(p.delta, p.sigma_h, p.sigma_l);
        let sh2 = p.sigma_h * p.sigma_h;
        let sl2 = p.sigma_l * p.sigma_l;
        let eta_star = ln(sl2 * (2.0 * p.delta - sh2) / (2.0 * p.delta * p.gamma * (sl2 - sh2)));
        let alt = |c: f64| c * c * (c * c - 1.0) * (c * c - 1.0) / 8.0;
        Self {
            params: p,
            c_h: spec.c_h,
            c_l: spec.c_l,
            c: p.r - p.delta,
            a: spec.a,
            eta_star,
            x0: ln(1.0 - spec.c_l),
            edge_l: spec.edge_l,
            edge_h: spec.edge_h,
            spectrum_edge: spec.spectrum_edge(),
            edge_alternative: -alt(spec.c_l).min(alt(spec.c_h)),
            interface_level: p.gamma * exp(eta_star),
        }
    }

    pub fn spectral(&self) -> SpectralCoefficients {
        SpectralCoefficients::new(self.params.delta, self.params.sigma_h, self.params.sigma_l)
    }

    pub fn sigma(&self, side: Side) -> f64 {
        match side {
            Side::Low => self.params.sigma_l,
            Side::High => self.params.sigma_h,
        }
    }

    pub fn ratio(&self, side: Side) -> f64 {
        match side {
            Side::Low => self.c_l,
            Side::High => self.c_h,
        }
    }

    /// Diffusion coefficient `sigma^2 / 2` on one side.
    pub fn diffusion(&self, side: Side) -> f64 {
        let s = self.sigma(side);
        0.5 * s * s
    }

    /// Drift `delta - sigma^2 / 2` on one side.
    pub fn drift(&self, side: Side) -> f64 {
        self.params.delta - self.diffusion(side)
    }

    /// Exponent `(c_J - 1)/2` of the weight, `q_J(y) = exp(-(c_J - 1) y / 2)`.
    pub fn weight_exponent(&self, side: Side) -> f64 {
        0.5 * (self.ratio(side) - 1.0)
    }

    /// `q_L` or `q_H`. Evaluates anywhere; norms only use the matching half-line.
    pub fn weight(&self, side: Side, y: f64) -> f64 {
        exp(-self.weight_exponent(side) * y)
    }

    /// Predicted per-side decay rates of the distance to the attenuated wave in
    /// original coordinates, for a given perturbation rate `omega`:
    /// `(r - (1 - c_L) c / 2 + omega, r + (c_H - 1) c / 2 + omega)`.
    pub fn reconstruction_rates(&self, omega: f64) -> (f64, f64) {
        let r = self.params.r;
        (
            r - (1.0 - self.c_l) * self.c / 2.0 + omega,
            r + (self.c_h - 1.0) * self.c / 2.0 + omega,
        )
    }

    /// The same rates in the alternative forms `r(1 - c_L)/2 + omega + (1 - c_L) delta / 2`
    /// and `(1 - c_H) c / 2 + omega + r`, reported next to the derived ones.
    pub fn reconstruction_rates_alternative(&self, omega: f64) -> (f64, f64) {
        let r = self.params.r;
        let d = self.params.delta;
        (
            r * (1.0 - self.c_l) / 2.0 + omega + (1.0 - self.c_l) * d / 2.0,
            (1.0 - self.c_h) * self.c / 2.0 + omega + r,
        )
    }
}

/// Reference set: `eta* = 0` exactly, `c_H = 2.5`, `c_L = 0.625`.
pub const P0: FinancialParams = FinancialParams::new(0.05, 0.8, 0.03, 0.2, 0.4);
/// Admissible, `c_H` close to 3.
pub const NEAR_CH3: FinancialParams = FinancialParams::new(0.05, 0.8, 0.03, 0.185, 0.4);
/// Admissible, `delta` close to `sigma_L^2 / 2`.
pub const NEAR_CL1: FinancialParams = FinancialParams::new(0.05, 0.8, 0.03, 0.2, 0.33);

pub const PRESET_NAMES: [&str; 3] = ["P0", "near-cH3", "near-cL1"];

pub fn preset(name: &str) -> Option<FinancialParams> {
    match name {
        "P0" | "p0" => Some(P0),
        "near-cH3" => Some(NEAR_CH3),
        "near-cL1" => Some(NEAR_CL1),
        _ => None,
    }
}

/// Human-readable list of preset names.
pub fn preset_list() -> String {
    PRESET_NAMES.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p0_derived_constants() {
        let d = P0.derive().unwrap();
        assert!((d.c_h - 2.5).abs() < 1e-14);
        assert!((d.c_l - 0.625).abs() < 1e-14);
        assert!(d.eta_star.abs() < 1e-15);
        assert!((d.a - 1.125).abs() < 1e-13);
        assert!((d.c + 0.02).abs() < 1e-16);
        assert!((d.x0 - (-0.980829253011726)).abs() < 1e-12);
        assert!((d.edge_l + 0.0028125).abs() < 1e-16);
        assert!((d.edge_h + 0.01125).abs() < 1e-16);
        assert_eq!(d.spectrum_edge, d.edge_l);
        assert!((d.interface_level - 0.8).abs() < 1e-15);
    }

    #[test]
    fn weights_at_p0() {
        let d = P0.derive().unwrap();
        assert_eq!(d.weight(Side::Low, 0.0), 1.0);
        assert_eq!(d.weight(Side::High, 0.0), 1.0);
        assert!((d.weight(Side::Low, -10.0) - 0.153355).abs() < 1e-6);
        assert!((d.weight(Side::High, 10.0) - 5.5308e-4).abs() < 1e-8);
    }

    #[test]
    fn swapped_volatilities_are_inadmissible() {
        let p = FinancialParams::new(0.05, 0.8, 0.03, 0.4, 0.2);
        let v = p.validate().unwrap();
        assert!(v.violations.contains(&Violation::DeltaNotBelowLowVariance));
        assert!(matches!(p.derive(), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn ratio_four_is_inadmissible() {
        let p = FinancialParams::new(0.08, 0.8, 0.03, 0.2, 0.5);
        let v = p.validate().unwrap();
        assert_eq!(v.violations, [Violation::HighRatioAboveThree]);
    }

    #[test]
    fn ratio_three_is_accepted() {
        let sigma_h = sqrt(2.0 * 0.06 / 3.0);
        let p = FinancialParams::new(0.06, 0.8, 0.03, sigma_h, 0.5);
        // 2 delta / sigma_H^2 may land one ulp above 3
        let admissible = p.validate().unwrap().is_admissible();
        assert_eq!(admissible, p.c_h() <= 3.0);
    }

    #[test]
    fn field_errors_name_the_field() {
        let p = FinancialParams::new(0.05, 0.8, -0.03, 0.2, 0.4);
        match p.validate() {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "r"),
            other => panic!("{other:?}"),
        }
        let p = FinancialParams::new(0.05, 1.0, 0.03, 0.2, 0.4);
        assert!(p.validate().is_err());
        let p = FinancialParams::new(f64::NAN, 0.8, 0.03, 0.2, 0.4);
        assert!(p.validate().is_err());
    }

    #[test]
    fn presets_are_admissible_with_positive_rates() {
        for name in PRESET_NAMES {
            let d = preset(name).unwrap().derive().unwrap();
            let omega = 0.9 * d.spectrum_edge.abs();
            let (lo, hi) = d.reconstruction_rates(omega);
            assert!(lo > 0.0 && hi > 0.0, "{name}");
            assert!(d.a > 0.0 && d.x0 < 0.0);
        }
    }

    #[test]
    fn branch_point_merges_roots() {
        let d = P0.derive().unwrap();
        for side in Side::BOTH {
            let c = d.ratio(side);
            let s = d.sigma(side);
            let disc = (c - 1.0) * (c - 1.0) / 4.0 + 2.0 * branch_point(s, c) / (s * s);
            assert!(disc.abs() < 1e-15);
        }
    }
}
