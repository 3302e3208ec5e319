//! Exact bivariate polynomials in `(c_H, c_L)` with rational coefficients.
//!
//! Used to re-derive the squared dispersion relation from scratch so the long
//! closed-form coefficients can be cross-checked.

use alloc::collections::BTreeMap;
use core::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::Zero;

use crate::math::pow;

type Q = Ratio<i64>;

/// `sum coeff * c_H^i * c_L^j`, keyed by `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(num: i64, den: i64) -> Self {
        Self::monomial(num, den, 0, 0)
    }

    pub fn monomial(num: i64, den: i64, ch: u32, cl: u32) -> Self {
        let mut p = Self::zero();
        p.add_term((ch, cl), Q::new(num, den));
        p
    }

    pub fn ch() -> Self {
        Self::monomial(1, 1, 1, 0)
    }

    pub fn cl() -> Self {
        Self::monomial(1, 1, 0, 1)
    }

    fn add_term(&mut self, key: (u32, u32), c: Q) {
        let e = self.terms.entry(key).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, ch: u32, cl: u32) -> Q {
        self.terms.get(&(ch, cl)).copied().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, num: i64, den: i64) -> Self {
        let k = Q::new(num, den);
        let mut out = Self::zero();
        for (&key, &c) in &self.terms {
            out.add_term(key, c * k);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(1, 1);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn eval(&self, ch: f64, cl: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| {
                let c = *c.numer() as f64 / *c.denom() as f64;
                c * pow(ch, i as f64) * pow(cl, j as f64)
            })
            .sum()
    }

    /// Sum of absolute term values; scale for relative comparisons.
    pub fn eval_abs(&self, ch: f64, cl: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| {
                let c = *c.numer() as f64 / *c.denom() as f64;
                (c * pow(ch, i as f64) * pow(cl, j as f64)).abs()
            })
            .sum()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (&k, &c) in &rhs.terms {
            out.add_term(k, c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let mut out = Poly::zero();
        for (&k, &c) in &self.terms {
            out.add_term(k, -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (&(i1, j1), &a) in &self.terms {
            for (&(i2, j2), &b) in &rhs.terms {
                out.add_term((i1 + i2, j1 + j2), a * b);
            }
        }
        out
    }
}

/// Polynomial numerators of the squaring chain. With `S = 1/sigma_H^2 + 1/sigma_L^2`
/// and `1/sigma_J^2 = c_J / (2 delta)`:
///
/// * `p  = c_L^2 P`, where `2 s_H s_L = P - 2 lambda S`,
/// * `b  = delta c_L^2 B`, the linear coefficient `-2 B lambda`,
/// * `r  = c_L^4 R`, the constant term,
/// * `x  = 4 delta^2 X^2 = (c_H - c_L)^2`, the `4 X^2 lambda^2` coefficient,
/// * `disc = b^2 - x r = delta^2 c_L^4 (B^2 - 4 X^2 R)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquaringTables {
    pub p: Poly,
    pub b: Poly,
    pub r: Poly,
    pub x: Poly,
    pub disc: Poly,
}

impl SquaringTables {
    pub fn derive() -> Self {
        let ch = Poly::ch();
        let cl = Poly::cl();
        let one = Poly::constant(1, 1);
        let ch1 = &ch - &one;
        let cl1 = &cl - &one;
        // c_L * (1 - c_H/c_L - (c_L - c_H)/2)
        let diff = &cl - &ch;
        let kappa = &diff - &(&diff * &cl).scale(1, 2);
        let cl2 = cl.pow(2);
        let p = &kappa.pow(2) - &(&cl2 * &(&ch1.pow(2) + &cl1.pow(2))).scale(1, 4);
        let cross = &(&ch1.pow(2) * &cl) + &(&cl1.pow(2) * &ch);
        let b = &(&(&ch + &cl) * &p) + &(&cl2 * &cross).scale(1, 2);
        let r = &(&cl.pow(4) * &(&ch1.pow(2) * &cl1.pow(2))).scale(1, 4) - &p.pow(2);
        let x = (&ch - &cl).pow(2);
        let disc = &b.pow(2) - &(&x * &r);
        Self { p, b, r, x, disc }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn arithmetic() {
        let a = &Poly::ch() + &Poly::constant(1, 2);
        let sq = a.pow(2);
        assert_eq!(sq.coefficient(2, 0), Q::one());
        assert_eq!(sq.coefficient(1, 0), Q::one());
        assert_eq!(sq.coefficient(0, 0), Q::new(1, 4));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn constant_term_factorizes() {
        // c_L^4 R = -c_H (c_L - 1)^2 (c_H - c_L)^2 (c_H + c_L^2 - 2 c_L)
        let t = SquaringTables::derive();
        let ch = Poly::ch();
        let cl = Poly::cl();
        let one = Poly::constant(1, 1);
        let f = &(&(&ch * &(&cl - &one).pow(2)) * &(&ch - &cl).pow(2))
            * &(&(&ch + &cl.pow(2)) - &cl.scale(2, 1));
        assert!((&t.r + &f).is_zero());
    }

    #[test]
    fn bound_numerator_factorizes() {
        // c_L^2 P = -(c_L - 1)(2 c_H^2 + c_H c_L^2 - 4 c_H c_L + c_L^2) / 2
        let t = SquaringTables::derive();
        let ch = Poly::ch();
        let cl = Poly::cl();
        let one = Poly::constant(1, 1);
        let q = &(&(&ch.pow(2).scale(2, 1) + &(&ch * &cl.pow(2))) - &(&ch * &cl).scale(4, 1)) + &cl.pow(2);
        let f = (&(&cl - &one) * &q).scale(-1, 2);
        assert!((&t.p - &f).is_zero());
    }
}
