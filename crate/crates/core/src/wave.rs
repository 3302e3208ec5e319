//! Closed-form traveling wave and the scalar interface maps.

use crate::error::{Error, Result};
use crate::math::{bracketed_newton, exp, expm1, ln1p};
use crate::params::{DerivedParams, Side};

/// The steady profile `K` in the moving frame, with one-sided derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveProfile {
    pub derived: DerivedParams,
}

impl WaveProfile {
    pub fn new(derived: DerivedParams) -> Self {
        Self { derived }
    }

    fn level(&self) -> f64 {
        self.derived.interface_level
    }

    fn low_growth(&self) -> f64 {
        1.0 - self.derived.c_l
    }

    fn high_growth(&self) -> f64 {
        1.0 - self.derived.c_h
    }

    /// Side that owns `y` for the two-sided value map.
    pub fn side_of(&self, y: f64) -> Side {
        if y <= self.derived.eta_star {
            Side::Low
        } else {
            Side::High
        }
    }

    /// Evaluates the branch formula of `side` at `y` (also off its half-line).
    pub fn value_on(&self, side: Side, y: f64) -> f64 {
        let s = y - self.derived.eta_star;
        match side {
            Side::Low => self.level() * exp(self.low_growth() * s),
            Side::High => 1.0 - (1.0 - self.level()) * exp(self.high_growth() * s),
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.value_on(self.side_of(y), y)
    }

    pub fn slope(&self, side: Side, y: f64) -> f64 {
        let s = y - self.derived.eta_star;
        match side {
            Side::Low => self.level() * self.low_growth() * exp(self.low_growth() * s),
            Side::High => {
                -(1.0 - self.level()) * self.high_growth() * exp(self.high_growth() * s)
            }
        }
    }

    pub fn curvature(&self, side: Side, y: f64) -> f64 {
        let s = y - self.derived.eta_star;
        match side {
            Side::Low => {
                let g = self.low_growth();
                self.level() * g * g * exp(g * s)
            }
            Side::High => {
                let g = self.high_growth();
                -(1.0 - self.level()) * g * g * exp(g * s)
            }
        }
    }

    /// `K'(eta*)`; both one-sided values agree.
    pub fn slope_at_interface(&self) -> f64 {
        self.level() * self.low_growth()
    }

    /// Jump `K''(eta*+) - K''(eta*-)` evaluated from the closed form
    /// `gamma e^{eta*} (1 - c_L) (2 delta / (sigma_H^2 sigma_L^2)) (sigma_H^2 - sigma_L^2)`.
    pub fn curvature_jump(&self) -> f64 {
        let p = &self.derived.params;
        let sh2 = p.sigma_h * p.sigma_h;
        let sl2 = p.sigma_l * p.sigma_l;
        self.level() * self.low_growth() * (2.0 * p.delta / (sh2 * sl2)) * (sh2 - sl2)
    }

    /// `sigma^2/2 K'' + (delta - sigma^2/2) K'` on one side.
    pub fn ode_residual_on(&self, side: Side, y: f64) -> f64 {
        self.derived.diffusion(side) * self.curvature(side, y)
            + self.derived.drift(side) * self.slope(side, y)
    }

    /// Two-sided residual; refuses the interface itself.
    pub fn ode_residual(&self, y: f64) -> Result<f64> {
        if y == self.derived.eta_star {
            return Err(Error::AtInterface);
        }
        Ok(self.ode_residual_on(self.side_of(y), y))
    }

    /// `e^{-rt} K(x + ct)`.
    pub fn attenuated(&self, t: f64, x: f64) -> f64 {
        exp(-self.derived.params.r * t) * self.value(x + self.derived.c * t)
    }

    /// `K(y) - K(y + shift)` without cancellation in the far field.
    pub fn shift_difference(&self, y: f64, shift: f64) -> f64 {
        let eta = self.derived.eta_star;
        let z = y + shift;
        if y <= eta && z <= eta {
            let g = self.low_growth();
            -self.level() * exp(g * (y - eta)) * expm1(g * shift)
        } else if y > eta && z > eta {
            let g = self.high_growth();
            (1.0 - self.level()) * exp(g * (y - eta)) * expm1(g * shift)
        } else {
            self.value(y) - self.value(z)
        }
    }
}

/// The interface nonlinearity `Phi(x) = gamma e^{eta*}(e^x - 1 - x + c_L x)`,
/// its inverse `Psi`, the remainder `R` and the map `Lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceMaps {
    level: f64,
    c_l: f64,
    x0: f64,
    margin: f64,
}

impl InterfaceMaps {
    pub fn new(derived: &DerivedParams) -> Self {
        let mut maps = Self {
            level: derived.interface_level,
            c_l: derived.c_l,
            x0: derived.x0,
            margin: 0.0,
        };
        maps.margin = 1e-9 * maps.phi_min().abs();
        maps
    }

    /// Overrides the safety margin above `Phi(x0)` for `psi`.
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.level * (expm1(x) - (1.0 - self.c_l) * x)
    }

    pub fn phi_prime(&self, x: f64) -> f64 {
        self.level * (expm1(x) + self.c_l)
    }

    /// `Phi(x0)`, the minimum of `Phi`.
    pub fn phi_min(&self) -> f64 {
        self.phi(self.x0)
    }

    /// `Psi'(0) = 1 / (gamma e^{eta*} c_L)`.
    pub fn psi_slope_at_zero(&self) -> f64 {
        1.0 / (self.level * self.c_l)
    }

    pub fn psi(&self, w: f64) -> Result<f64> {
        let limit = self.phi_min() + self.margin;
        if !(w > limit) {
            return Err(Error::OutOfDomain {
                map: "Psi",
                value: w,
                limit: self.phi_min(),
            });
        }
        if w == 0.0 {
            return Ok(0.0);
        }
        let hi = if w > 0.0 { ln1p(w / self.level) + 1.0 } else { 0.0 };
        let guess = self.psi_slope_at_zero() * w;
        bracketed_newton(
            |x| (self.phi(x) - w, self.phi_prime(x)),
            self.x0,
            hi,
            guess,
        )
        .ok_or(Error::NoConvergence("Psi"))
    }

    pub fn psi_prime(&self, w: f64) -> Result<f64> {
        Ok(1.0 / self.phi_prime(self.psi(w)?))
    }

    pub fn psi_second(&self, w: f64) -> Result<f64> {
        let x = self.psi(w)?;
        let d = self.phi_prime(x);
        Ok(-self.level * exp(x) / (d * d * d))
    }

    /// `R(w) = Psi(w) - Psi'(0) w`.
    pub fn remainder(&self, w: f64) -> Result<f64> {
        Ok(self.psi(w)? - self.psi_slope_at_zero() * w)
    }

    /// `Lambda(x) = x + gamma e^{eta*} (1 - c_L) Psi(x)`.
    pub fn lambda(&self, x: f64) -> Result<f64> {
        Ok(x + self.level * (1.0 - self.c_l) * self.psi(x)?)
    }

    fn lambda_prime(&self, x: f64) -> Result<f64> {
        Ok(1.0 + self.level * (1.0 - self.c_l) * self.psi_prime(x)?)
    }

    /// Infimum of the range of `Lambda`, `-gamma e^{eta*} c_L`.
    pub fn basin_limit(&self) -> f64 {
        -self.level * self.c_l
    }

    /// Inverse of `Lambda`; values at or below the basin limit are rejected.
    pub fn lambda_inverse(&self, v: f64) -> Result<f64> {
        if v == 0.0 {
            return Ok(0.0);
        }
        let out = Error::OutOfBasin {
            value: v,
            limit: self.basin_limit(),
        };
        if !(v > self.basin_limit()) || !v.is_finite() {
            return Err(out);
        }
        let lo = self.phi_min() + 2.0 * self.margin.max(f64::EPSILON * self.phi_min().abs());
        let hi = if v > 0.0 { v } else { 0.0 };
        match self.lambda(lo) {
            Ok(l) if l < v => {}
            _ => return Err(out),
        }
        let eval = |x: f64| match (self.lambda(x), self.lambda_prime(x)) {
            (Ok(l), Ok(d)) => (l - v, d),
            _ => (f64::NAN, f64::NAN),
        };
        bracketed_newton(eval, lo, hi, self.c_l * v).ok_or(Error::NoConvergence("Lambda inverse"))
    }
}
