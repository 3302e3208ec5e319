//! Closed-form conditions for zeros of the dispersion function with
//! nonnegative real part, and the quantities of the squaring chain.

use crate::params::SpectralCoefficients;

use super::poly::SquaringTables;

/// How the printed inequalities are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Strictness {
    /// Exactly as printed (`>=, <=, >=` and `>=, <=, <, <=, >`).
    #[default]
    AsPrinted,
    /// Every comparison strict.
    AllStrict,
    /// Every comparison non-strict.
    AllNonStrict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Ge,
    Gt,
    Le,
    Lt,
}

impl Cmp {
    fn holds(self, v: f64) -> bool {
        match self {
            Cmp::Ge => v >= 0.0,
            Cmp::Gt => v > 0.0,
            Cmp::Le => v <= 0.0,
            Cmp::Lt => v < 0.0,
        }
    }

    fn adjust(self, s: Strictness) -> Cmp {
        match (s, self) {
            (Strictness::AsPrinted, c) => c,
            (Strictness::AllStrict, Cmp::Ge | Cmp::Gt) => Cmp::Gt,
            (Strictness::AllStrict, Cmp::Le | Cmp::Lt) => Cmp::Lt,
            (Strictness::AllNonStrict, Cmp::Ge | Cmp::Gt) => Cmp::Ge,
            (Strictness::AllNonStrict, Cmp::Le | Cmp::Lt) => Cmp::Le,
        }
    }
}

const SYSTEM_ONE: [Cmp; 3] = [Cmp::Ge, Cmp::Le, Cmp::Ge];
const SYSTEM_TWO: [Cmp; 5] = [Cmp::Ge, Cmp::Le, Cmp::Lt, Cmp::Le, Cmp::Gt];

/// `(c_L - 2)(c_H - c_L)`: sign of the constant side of the unsquared relation.
pub fn sign_condition(c_h: f64, c_l: f64) -> f64 {
    (c_l - 2.0) * (c_h - c_l)
}

/// `(c_L - 1)(2 c_H^2 + c_H c_L^2 - 4 c_H c_L + c_L^2)`.
pub fn bound_condition(c_h: f64, c_l: f64) -> f64 {
    (c_l - 1.0) * (2.0 * c_h * c_h + c_h * c_l * c_l - 4.0 * c_h * c_l + c_l * c_l)
}

/// Polynomial factor of the linear coefficient (the bracket after `(c_L - c_H)`).
pub fn linear_factor(k: &SpectralCoefficients) -> f64 {
    let (ch, cl) = (k.c_h, k.c_l);
    let sh2 = k.sigma_h * k.sigma_h;
    let sl2 = k.sigma_l * k.sigma_l;
    -sh2 * ch * cl * cl + 2.0 * sh2 * ch * cl - 2.0 * sh2 * ch - sh2 * cl * cl
        + 2.0 * sh2 * cl
        + 2.0 * sl2 * ch * cl
        - 2.0 * sl2 * ch
        + sl2 * cl * cl * cl
        - 3.0 * sl2 * cl * cl
        + 2.0 * sl2 * cl
}

/// `(c_L - c_H) * linear_factor`, the third inequality of both systems.
pub fn linear_condition(k: &SpectralCoefficients) -> f64 {
    (k.c_l - k.c_h) * linear_factor(k)
}

/// `c_H (c_L - 1)^2 (c_H - c_L)^2 (c_H + c_L^2 - 2 c_L)`.
pub fn constant_condition(c_h: f64, c_l: f64) -> f64 {
    let a = c_l - 1.0;
    let b = c_h - c_l;
    c_h * a * a * b * b * (c_h + c_l * c_l - 2.0 * c_l)
}

/// Real-part bound beyond which the once-squared relation has no solutions:
/// `-sigma_H^2 sigma_L^2 (c_L - 1)(2 c_H^2 + ...) / (4 (sigma_H^2 + sigma_L^2) c_L^2)`.
pub fn real_part_bound(k: &SpectralCoefficients) -> f64 {
    let sh2 = k.sigma_h * k.sigma_h;
    let sl2 = k.sigma_l * k.sigma_l;
    -sh2 * sl2 * bound_condition(k.c_h, k.c_l) / (4.0 * (sh2 + sl2) * k.c_l * k.c_l)
}

/// Coefficients of `4 X^2 lambda^2 - 2 B lambda = R`, in the expanded forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratic {
    /// `X^2 = (1/sigma_H^2 - 1/sigma_L^2)^2`.
    pub x2: f64,
    pub b: f64,
    pub r: f64,
}

impl Quadratic {
    pub fn expanded(k: &SpectralCoefficients) -> Self {
        let (ch, cl) = (k.c_h, k.c_l);
        let ih = 1.0 / (k.sigma_h * k.sigma_h);
        let il = 1.0 / (k.sigma_l * k.sigma_l);
        let q = ch / cl;
        let b = il * (ch * ch + 2.0 + 3.0 * ch + 2.0 * q * q - ch * cl - 4.0 * q - 2.0 * ch * q - cl)
            + ih * (cl * cl + 2.0 - 3.0 * cl + 2.0 * q * q - ch * cl - 4.0 * q + 5.0 * ch - 2.0 * ch * q);
        let ch2 = ch * ch;
        let ch3 = ch2 * ch;
        let ch4 = ch3 * ch;
        let r = -q * q * q * q - 5.0 * q * q - 9.0 * ch2 - ch4 / (cl * cl) + 6.0 * ch3 / cl + 4.0 * q * q * q
            - 9.0 * ch3 / (cl * cl)
            + 2.0 * ch4 / (cl * cl * cl)
            + 12.0 * ch2 / cl
            + 4.0 * ch * cl
            + 2.0 * ch2 * cl
            - ch3
            - ch * cl * cl
            + 2.0 * q
            - 5.0 * ch;
        let x = ih - il;
        Self { x2: x * x, b, r }
    }

    /// Same coefficients from the exactly derived polynomial tables.
    pub fn from_tables(k: &SpectralCoefficients, t: &SquaringTables) -> Self {
        let (ch, cl, d) = (k.c_h, k.c_l, k.delta);
        let cl2 = cl * cl;
        Self {
            x2: t.x.eval(ch, cl) / (4.0 * d * d),
            b: t.b.eval(ch, cl) / (d * cl2),
            r: t.r.eval(ch, cl) / (cl2 * cl2),
        }
    }

    /// `4 X^2 lambda^2 - 2 B lambda - R`.
    pub fn residual(&self, lambda: crate::C64) -> crate::C64 {
        lambda * lambda * (4.0 * self.x2) - lambda * (2.0 * self.b) - self.r
    }

    /// `B^2 - 4 X^2 R`, the quantity the condition system tests.
    pub fn delta(&self) -> f64 {
        self.b * self.b - 4.0 * self.x2 * self.r
    }

    /// Textbook discriminant of `4 X^2 l^2 - 2 B l - R = 0`: `4 (B^2 + 4 X^2 R)`.
    pub fn standard_discriminant(&self) -> f64 {
        4.0 * (self.b * self.b + 4.0 * self.x2 * self.r)
    }
}

/// The long factored form of `B^2 - 4 X^2 R`.
pub fn delta_factored(k: &SpectralCoefficients) -> f64 {
    let (ch, cl) = (k.c_h, k.c_l);
    let ih = 1.0 / (k.sigma_h * k.sigma_h);
    let il = 1.0 / (k.sigma_l * k.sigma_l);
    let (ch2, cl2) = (ch * ch, cl * cl);
    let (cl3, cl4) = (cl2 * cl, cl2 * cl2);
    let h = (cl - 1.0) * (cl - 1.0) * (8.0 * ch2 + 8.0 * ch * cl2 - 16.0 * ch * cl + cl4 - 4.0 * cl3 + 4.0 * cl2);
    let l = ch2 * cl4 - 4.0 * ch2 * cl3 + 12.0 * ch2 * cl2 - 16.0 * ch2 * cl + 8.0 * ch2 + 6.0 * ch * cl4
        - 24.0 * ch * cl3
        + 32.0 * ch * cl2
        - 16.0 * ch * cl
        + cl4
        - 4.0 * cl3
        + 4.0 * cl2;
    let m = (cl - 1.0) * (2.0 * ch2 * cl2 + ch * cl4 - 4.0 * ch * cl2 + cl4 - 4.0 * cl3 + 4.0 * cl2);
    let d = ch - cl;
    d * d / cl4 * (ih * ih * h + il * il * l - 2.0 * ih * il * m)
}

/// Expression values of both systems.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConditionValues {
    pub system_one: [f64; 3],
    pub system_two: [f64; 5],
}

impl ConditionValues {
    pub fn evaluate(k: &SpectralCoefficients) -> Self {
        let s = sign_condition(k.c_h, k.c_l);
        let b = bound_condition(k.c_h, k.c_l);
        let lin = linear_condition(k);
        Self {
            system_one: [s, b, lin],
            system_two: [s, b, lin, constant_condition(k.c_h, k.c_l), delta_factored(k)],
        }
    }

    pub fn system_one_tests(&self, s: Strictness) -> [bool; 3] {
        core::array::from_fn(|i| SYSTEM_ONE[i].adjust(s).holds(self.system_one[i]))
    }

    pub fn system_two_tests(&self, s: Strictness) -> [bool; 5] {
        core::array::from_fn(|i| SYSTEM_TWO[i].adjust(s).holds(self.system_two[i]))
    }

    pub fn system_one(&self, s: Strictness) -> bool {
        self.system_one_tests(s).iter().all(|&b| b)
    }

    pub fn system_two(&self, s: Strictness) -> bool {
        self.system_two_tests(s).iter().all(|&b| b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::P0;

    #[test]
    fn p0_fails_both_systems() {
        let k = P0.spectral().unwrap();
        let v = ConditionValues::evaluate(&k);
        assert!((v.system_one[0] - (-1.375 * 1.875)).abs() < 1e-12);
        assert!(!v.system_one(Strictness::AsPrinted));
        assert!(!v.system_two(Strictness::AsPrinted));
    }

    #[test]
    fn integer_example() {
        assert_eq!(sign_condition(4.0, 3.0), 1.0);
        assert_eq!(bound_condition(4.0, 3.0), 58.0);
    }

    #[test]
    fn equal_ratios_vanish() {
        let k = SpectralCoefficients::new(0.05, 0.3, 0.3);
        let v = ConditionValues::evaluate(&k);
        assert_eq!(v.system_one[0], 0.0);
        assert_eq!(v.system_one[2], 0.0);
        let t = v.system_one_tests(Strictness::AsPrinted);
        assert!(t[0] && t[2]);
        // leading coefficient vanishes, delta is a perfect square
        let q = Quadratic::expanded(&k);
        assert!(q.x2.abs() < 1e-20);
        assert!(q.delta() >= 0.0);
    }

    #[test]
    fn printed_and_derived_forms_agree() {
        let t = SquaringTables::derive();
        for &(d, sh, sl) in &[(0.05, 0.2, 0.4), (0.03, 0.17, 0.5), (0.08, 0.5, 0.21), (0.05, 0.3, 0.3)] {
            let k = SpectralCoefficients::new(d, sh, sl);
            let a = Quadratic::expanded(&k);
            let b = Quadratic::from_tables(&k, &t);
            assert!((a.b - b.b).abs() <= 1e-10 * a.b.abs().max(1.0));
            assert!((a.r - b.r).abs() <= 1e-10 * a.r.abs().max(1.0));
            let df = delta_factored(&k);
            assert!((df - a.delta()).abs() <= 1e-9 * df.abs().max(1e-12));
            // factored linear coefficient
            let lin = (k.c_l - k.c_h) / (sh * sh * sl * sl * k.c_l * k.c_l) * linear_factor(&k);
            assert!((lin - a.b).abs() <= 1e-10 * a.b.abs().max(1.0));
        }
    }

    #[test]
    fn strictness_variants() {
        let v = ConditionValues {
            system_one: [0.0, 0.0, 0.0],
            system_two: [0.0, 0.0, 0.0, 0.0, 0.0],
        };
        assert!(v.system_one(Strictness::AsPrinted));
        assert!(!v.system_one(Strictness::AllStrict));
        assert!(v.system_two(Strictness::AllNonStrict));
        assert!(!v.system_two(Strictness::AsPrinted));
    }
}
