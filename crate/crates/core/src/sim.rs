//! Front-fixed time stepping of the free-boundary problem.
//!
//! Two formulations are available:
//!
//! * `W`: the fully nonlinear problem for the ansatz remainder `w`, with the
//!   interface shift eliminated. The linear operator is Crank-Nicolson, the
//!   nonlinear bulk term is extrapolated to the half step (AB2) and the
//!   nonlinear part of the jump condition to the new level.
//! * `U`: the perturbation `v = u - K` of the front-fixed price. Storing `v`
//!   rather than `u` keeps the steady state exact. The interface position is
//!   read off `u(eta*) = gamma e^eta`; its velocity is extrapolated from the
//!   recorded positions.
//!
//! Both use the shared uniform grid, Dirichlet data at the truncation ends and
//! one-sided three-point stencils for the interface row.

use alloc::vec::Vec;

use crate::coupled::{CoupledSystem, InterfaceRow};
use crate::error::{Error, Result};
use crate::grid::{Grid, HalfLinePair};
use crate::math::{exp, ln1p};
use crate::norms::{x_norm, x_norm_side};
use crate::params::{DerivedParams, FinancialParams, Side};
use crate::tridiag::Tridiagonal;
use crate::wave::{InterfaceMaps, WaveProfile};

/// Smallest accepted denominator of the interface velocity quotient.
pub const REGIME_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Formulation {
    U,
    W,
}

/// Initial perturbation `v_0 = u_0 - K`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    /// `eps exp(-(y - eta*)^2 / (2 s^2))`.
    Bump { amplitude: f64, width: f64 },
    /// `eps (q(y)/q(eta*)) exp(-(y - eta*)^2 / (2 s^2)) (1 + a (y - eta*))`, with
    /// `a` the weight exponent of the side; the last factor makes it `C^1`.
    WeightedBump { amplitude: f64, width: f64 },
    /// Samples on the simulation grid.
    Custom(HalfLinePair<f64>),
}

impl InitialData {
    pub fn sample(&self, k: &DerivedParams, grid: Grid) -> Result<HalfLinePair<f64>> {
        let eta = k.eta_star;
        match self {
            InitialData::Zero => Ok(HalfLinePair::zeros(grid)),
            InitialData::Bump { amplitude, width } => {
                check_width(*width)?;
                Ok(HalfLinePair::from_fn(grid, |_, y| {
                    let z = (y - eta) / width;
                    amplitude * exp(-0.5 * z * z)
                }))
            }
            InitialData::WeightedBump { amplitude, width } => {
                check_width(*width)?;
                Ok(HalfLinePair::from_fn(grid, |side, y| {
                    let d = y - eta;
                    let z = d / width;
                    let a = k.weight_exponent(side);
                    amplitude * exp(-a * d) * exp(-0.5 * z * z) * (1.0 + a * d)
                }))
            }
            InitialData::Custom(p) => {
                if p.grid != grid {
                    return Err(Error::InvalidGrid("custom initial data is on a different grid"));
                }
                if p.low.iter().chain(&p.high).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidConfig("custom initial data is not finite".into()));
                }
                Ok(p.clone())
            }
        }
    }
}

fn check_width(w: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "width",
            requirement: "finite and positive",
            value: w,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: FinancialParams,
    pub h: f64,
    pub l_low: f64,
    pub l_high: f64,
    pub dt: f64,
    pub horizon: f64,
    pub snapshot_times: Vec<f64>,
    /// Time between trace records; `0` records every step.
    pub record_interval: f64,
    pub formulation: Formulation,
    pub initial: InitialData,
    /// Switches the nonlinear terms off (linearized dynamics).
    pub nonlinear: bool,
}

impl SimConfig {
    pub fn new(params: FinancialParams, formulation: Formulation, initial: InitialData) -> Self {
        Self {
            params,
            h: 0.05,
            l_low: 60.0,
            l_high: 60.0,
            dt: 0.05,
            horizon: 100.0,
            snapshot_times: Vec::new(),
            record_interval: 0.0,
            formulation,
            initial,
            nonlinear: true,
        }
    }

    pub fn grid(&self, k: &DerivedParams) -> Result<Grid> {
        let g = Grid::with_extent(self.h, self.l_low, self.l_high, k.eta_star)?;
        if g.cells(Side::Low) < MIN_CELLS || g.cells(Side::High) < MIN_CELLS {
            return Err(Error::InvalidGrid("simulation needs at least 16 cells per side"));
        }
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                requirement: "finite and positive",
                value: self.dt,
            });
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                requirement: "finite and non-negative",
                value: self.horizon,
            });
        }
        if !(self.record_interval >= 0.0 && self.record_interval.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "record_interval",
                requirement: "finite and non-negative",
                value: self.record_interval,
            });
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidConfig("snapshot times must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Fewest cells per side of a simulation grid.
pub const MIN_CELLS: usize = 16;

/// Shared model data for the steppers.
#[derive(Debug, Clone)]
pub struct Model {
    pub derived: DerivedParams,
    pub wave: WaveProfile,
    pub maps: InterfaceMaps,
    pub grid: Grid,
}

impl Model {
    pub fn new(derived: DerivedParams, grid: Grid) -> Self {
        Self {
            derived,
            wave: WaveProfile::new(derived),
            maps: InterfaceMaps::new(&derived),
            grid,
        }
    }

    /// `K'` sampled on both sides (the two interface values coincide).
    fn slope(&self) -> HalfLinePair<f64> {
        HalfLinePair::from_fn(self.grid, |s, y| self.wave.slope(s, y))
    }

    fn curvature(&self) -> HalfLinePair<f64> {
        HalfLinePair::from_fn(self.grid, |s, y| self.wave.curvature(s, y))
    }

    /// Splits `v` into the interface shift `f` and the remainder
    /// `w = v - f K'`, with `w(eta*) = Lambda^{-1}(v(eta*))` and `f = Psi(w(eta*))`.
    pub fn decompose(&self, v: &HalfLinePair<f64>) -> Result<(HalfLinePair<f64>, f64)> {
        let wi = self.maps.lambda_inverse(v.at_interface().0)?;
        let f = self.maps.psi(wi)?;
        let w = v.map(|s, y, x| x - f * self.wave.slope(s, y));
        Ok((w, f))
    }

    /// `v = f K' + w` with `f = Psi(w(eta*))`.
    pub fn compose(&self, w: &HalfLinePair<f64>) -> Result<(HalfLinePair<f64>, f64)> {
        let f = self.maps.psi(w.at_interface().0)?;
        Ok((w.map(|s, y, x| x + f * self.wave.slope(s, y)), f))
    }
}

/// One-sided derivatives of `w` at the interface from the low side:
/// three-point first and four-point second differences.
pub fn left_traces(w: &HalfLinePair<f64>) -> (f64, f64) {
    let v = &w.low;
    let n = v.len() - 1;
    let h = w.grid.h();
    let d1 = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    let d2 = (2.0 * v[n] - 5.0 * v[n - 1] + 4.0 * v[n - 2] - v[n - 3]) / (h * h);
    (d1, d2)
}

/// `[v_y]` at the interface from one-sided four-point differences. The
/// stepping row zeroes the three-point version, so this measures the
/// discretization defect of the matching condition.
pub fn slope_jump_estimate(v: &HalfLinePair<f64>) -> f64 {
    let h = v.grid.h();
    let (l, r) = (&v.low, &v.high);
    let n = l.len() - 1;
    let left = (11.0 * l[n] - 18.0 * l[n - 1] + 9.0 * l[n - 2] - 2.0 * l[n - 3]) / (6.0 * h);
    let right = (-11.0 * r[0] + 18.0 * r[1] - 9.0 * r[2] + 2.0 * r[3]) / (6.0 * h);
    right - left
}

/// The velocity quotient with every input given explicitly. Returns the
/// velocity and the denominator.
pub fn velocity_quotient(
    psi: f64,
    psi_prime: f64,
    curvature_left: f64,
    slope_left: f64,
    second_left: f64,
    diffusion: f64,
    drift: f64,
) -> (f64, f64) {
    let num = psi_prime * (diffusion * second_left + drift * slope_left);
    let den = 1.0 - psi_prime * (psi * curvature_left + slope_left);
    (num / den, den)
}

/// Interface velocity `f'(t)` from the state of the remainder `w`.
pub fn stefan_velocity(model: &Model, w: &HalfLinePair<f64>) -> Result<f64> {
    let wi = w.at_interface().0;
    let psi = model.maps.psi(wi)?;
    let psi_prime = model.maps.psi_prime(wi)?;
    let (d1, d2) = left_traces(w);
    let k = &model.derived;
    let (vel, den) = velocity_quotient(
        psi,
        psi_prime,
        model.wave.curvature(Side::Low, k.eta_star),
        d1,
        d2,
        k.diffusion(Side::Low),
        k.drift(Side::Low),
    );
    if !(den > REGIME_LIMIT) {
        return Err(Error::LeftSmallRegime(den));
    }
    Ok(vel)
}

/// Linear extrapolation in time from the two most recent samples.
#[derive(Debug, Clone)]
struct History<T> {
    prev: Option<(f64, T)>,
    last: Option<(f64, T)>,
}

impl<T: Clone> Default for History<T> {
    fn default() -> Self {
        Self { prev: None, last: None }
    }
}

impl<T: Clone> History<T> {
    fn push(&mut self, t: f64, v: T) {
        self.prev = self.last.take();
        self.last = Some((t, v));
    }
}

impl History<f64> {
    fn at(&self, t: f64) -> f64 {
        match (&self.prev, &self.last) {
            (Some((t0, a)), Some((t1, b))) => b + (b - a) * (t - t1) / (t1 - t0),
            (None, Some((_, b))) => *b,
            _ => 0.0,
        }
    }
}

impl History<HalfLinePair<f64>> {
    fn at(&self, t: f64) -> Option<HalfLinePair<f64>> {
        match (&self.prev, &self.last) {
            (Some((t0, a)), Some((t1, b))) => {
                let s = (t - t1) / (t1 - t0);
                b.zip_with(a, |x, y| x + (x - y) * s).ok()
            }
            (None, Some((_, b))) => Some(b.clone()),
            _ => None,
        }
    }
}

/// Interior centered first differences; endpoints left at zero (they are
/// never used in interior rows).
fn centered_slope(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut out = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    out
}

fn centered_pair(p: &HalfLinePair<f64>) -> HalfLinePair<f64> {
    let h = p.grid.h();
    HalfLinePair {
        grid: p.grid,
        low: centered_slope(&p.low, h),
        high: centered_slope(&p.high, h),
    }
}

/// Theta-scheme system for one `(dt, theta)`, both sides plus the interface
/// row. `theta = 1/2` is Crank-Nicolson, `theta = 1` backward Euler.
#[derive(Debug, Clone)]
struct ThetaSystem {
    dt: f64,
    theta: f64,
    system: CoupledSystem<f64>,
    /// `(lower, diag, upper)` of the explicit part `I + (1 - theta) dt L_h` per side.
    explicit: [(f64, f64, f64); 2],
    /// Implicit couplings to the low and high truncation ends, moved to the
    /// right-hand side.
    ends: [f64; 2],
}

impl ThetaSystem {
    fn new(model: &Model, dt: f64, theta: f64, row: InterfaceRow<f64>) -> Result<Self> {
        let h = model.grid.h();
        let k = &model.derived;
        let coeffs = |side: Side| {
            let d = k.diffusion(side) / (h * h);
            let b = k.drift(side) / (2.0 * h);
            (d - b, -2.0 * d, d + b)
        };
        let (im, ex) = (theta * dt, (1.0 - theta) * dt);
        let mut implicit = Vec::new();
        let mut explicit = [(0.0, 0.0, 0.0); 2];
        let mut ends = [0.0; 2];
        for (s, side) in Side::BOTH.into_iter().enumerate() {
            let (lo, di, up) = coeffs(side);
            let n = model.grid.cells(side) - 1;
            implicit.push((Tridiagonal::constant(n, -im * lo, 1.0 - im * di, -im * up), -im * lo, -im * up));
            explicit[s] = (ex * lo, 1.0 + ex * di, ex * up);
            ends[s] = if side == Side::Low { im * lo } else { im * up };
        }
        let (low, _, low_link) = &implicit[0];
        let (high, high_link, _) = &implicit[1];
        let system = CoupledSystem::new(low, *low_link, high, *high_link, row)?;
        Ok(Self {
            dt,
            theta,
            system,
            explicit,
            ends,
        })
    }

    /// Advances `state`; `source` is added to every interior row (already a
    /// rate, multiplied by `dt` here) and `ends` are the new values at the
    /// truncation ends.
    fn advance(
        &self,
        state: &HalfLinePair<f64>,
        source: Option<&HalfLinePair<f64>>,
        interface_rhs: f64,
        ends: [f64; 2],
    ) -> HalfLinePair<f64> {
        let mut rhs: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (s, side) in Side::BOTH.into_iter().enumerate() {
            let v = state.side(side);
            let (lo, di, up) = self.explicit[s];
            let n = v.len() - 1;
            rhs[s] = (1..n)
                .map(|i| {
                    let mut r = lo * v[i - 1] + di * v[i] + up * v[i + 1];
                    if let Some(src) = source {
                        r += self.dt * src.side(side)[i];
                    }
                    r
                })
                .collect();
        }
        let [mut low, mut high] = rhs;
        low[0] += self.ends[0] * ends[0];
        if let Some(last) = high.last_mut() {
            *last += self.ends[1] * ends[1];
        }
        let wi = self.system.solve(&mut low, &mut high, interface_rhs);
        let mut out_low = Vec::with_capacity(low.len() + 2);
        out_low.push(ends[0]);
        out_low.extend_from_slice(&low);
        out_low.push(wi);
        let mut out_high = Vec::with_capacity(high.len() + 2);
        out_high.push(wi);
        out_high.extend_from_slice(&high);
        out_high.push(ends[1]);
        HalfLinePair {
            grid: state.grid,
            low: out_low,
            high: out_high,
        }
    }
}

/// Snapshot of the evolving state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// `v = u - K` in front-fixed coordinates.
    pub v: HalfLinePair<f64>,
    /// Ansatz remainder.
    pub w: HalfLinePair<f64>,
    /// Interface position `eta(t)`.
    pub eta: f64,
    /// `eta - eta*`.
    pub f: f64,
    /// Current interface velocity estimate.
    pub eta_dot: f64,
}

impl SimState {
    /// Front-fixed price `u = K + v`.
    pub fn u(&self, wave: &WaveProfile) -> HalfLinePair<f64> {
        self.v.map(|s, y, x| wave.value_on(s, y) + x)
    }
}

/// Builds the initial state from `v_0` (the interface shift follows from
/// the interface condition, so `eta_0` is not a free input).
pub fn initial_from_profile_perturbation(model: &Model, v0: &HalfLinePair<f64>) -> Result<SimState> {
    if v0.grid != model.grid {
        return Err(Error::InvalidGrid("perturbation is on a different grid"));
    }
    let (w, f) = model.decompose(v0)?;
    let eta_dot = stefan_velocity(model, &w)?;
    Ok(SimState {
        t: 0.0,
        v: v0.clone(),
        w,
        eta: model.derived.eta_star + f,
        f,
        eta_dot,
    })
}

pub trait Stepper {
    fn state(&self) -> &SimState;
    fn model(&self) -> &Model;
    /// Advances by `dt`; the state is unchanged on error.
    fn step(&mut self, dt: f64) -> Result<()>;
}

fn cached_solver(
    cache: &mut Vec<ThetaSystem>,
    model: &Model,
    dt: f64,
    theta: f64,
    row: InterfaceRow<f64>,
) -> Result<usize> {
    if let Some(i) = cache.iter().position(|c| c.dt == dt && c.theta == theta) {
        return Ok(i);
    }
    cache.push(ThetaSystem::new(model, dt, theta, row)?);
    Ok(cache.len() - 1)
}

/// Steps started with two backward-Euler half steps to damp the
/// Crank-Nicolson response to the non-smooth initial data.
pub const DAMPED_STEPS: usize = 2;

/// Shared step logic: damped start-up, then Crank-Nicolson.
fn damped_step<S>(stepper: &mut S, startup: &mut usize, dt: f64, sub: fn(&mut S, f64, f64) -> Result<()>) -> Result<()> {
    if *startup > 0 {
        *startup -= 1;
        sub(stepper, 0.5 * dt, 1.0)?;
        sub(stepper, 0.5 * dt, 1.0)
    } else {
        sub(stepper, dt, 0.5)
    }
}

/// Remainder formulation.
#[derive(Debug, Clone)]
pub struct WStepper {
    model: Model,
    state: SimState,
    nonlinear: bool,
    bulk: History<HalfLinePair<f64>>,
    jump: History<f64>,
    shift: History<f64>,
    curvature: HalfLinePair<f64>,
    /// `K'` at the two truncation ends: the far field `v = 0` means `w = -f K'`.
    far_slope: [f64; 2],
    solvers: Vec<ThetaSystem>,
    startup: usize,
}

impl WStepper {
    pub fn new(model: Model, state: SimState, nonlinear: bool) -> Self {
        let curvature = model.curvature();
        let g = model.grid;
        let far_slope = [
            model.wave.slope(Side::Low, g.node(Side::Low, 0)),
            model.wave.slope(Side::High, g.node(Side::High, g.cells(Side::High))),
        ];
        Self {
            model,
            state,
            nonlinear,
            bulk: History::default(),
            jump: History::default(),
            shift: History::default(),
            curvature,
            far_slope,
            solvers: Vec::new(),
            startup: DAMPED_STEPS,
        }
    }

    fn row(&self) -> InterfaceRow<f64> {
        let inv = 1.0 / self.model.grid.h();
        InterfaceRow {
            center: -3.0 * inv - self.model.derived.a,
            low: [2.0 * inv, -0.5 * inv],
            high: [2.0 * inv, -0.5 * inv],
        }
    }

    /// `f' (f K'' + w_y)` at interior nodes.
    fn bulk_term(&self, w: &HalfLinePair<f64>, f: f64, velocity: f64) -> HalfLinePair<f64> {
        let wy = centered_pair(w);
        let mut out = wy;
        for side in Side::BOTH {
            let k2 = self.curvature.side(side);
            for (i, x) in out.side_mut(side).iter_mut().enumerate() {
                *x = velocity * (f * k2[i] + *x);
            }
        }
        out
    }

    /// `G(w) = -[K''] R(w(eta*))`.
    fn jump_term(&self, wi: f64) -> Result<f64> {
        Ok(-self.model.wave.curvature_jump() * self.model.maps.remainder(wi)?)
    }
}

impl Stepper for WStepper {
    fn state(&self) -> &SimState {
        &self.state
    }

    fn model(&self) -> &Model {
        &self.model
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let mut startup = self.startup;
        let r = damped_step(self, &mut startup, dt, Self::substep);
        self.startup = startup;
        r
    }
}

impl WStepper {
    fn substep(&mut self, dt: f64, theta: f64) -> Result<()> {
        let s = &self.state;
        let t = s.t;
        let (source, g) = if self.nonlinear {
            let velocity = stefan_velocity(&self.model, &s.w)?;
            let bulk = self.bulk_term(&s.w, s.f, velocity);
            let g = self.jump_term(s.w.at_interface().0)?;
            self.bulk.push(t, bulk);
            self.jump.push(t, g);
            (self.bulk.at(t + theta * dt), self.jump.at(t + dt))
        } else {
            (None, 0.0)
        };
        self.shift.push(t, s.f);
        let f_next = self.shift.at(t + dt);
        let ends = self.far_slope.map(|k1| -f_next * k1);
        let row = self.row();
        let idx = cached_solver(&mut self.solvers, &self.model, dt, theta, row)?;
        let w = self.solvers[idx].advance(&s.w, source.as_ref(), g, ends);
        let (v, f) = self.model.compose(&w)?;
        let eta_dot = if self.nonlinear {
            stefan_velocity(&self.model, &w)?
        } else {
            0.0
        };
        self.state = SimState {
            t: t + dt,
            v,
            w,
            eta: self.model.derived.eta_star + f,
            f,
            eta_dot,
        };
        Ok(())
    }
}

/// Price-perturbation formulation. The velocity over a step is the backward
/// difference of the interface position, solved together with the step: the
/// advection term is linear in that scalar, so the new state is an affine
/// function of it and only a scalar equation remains.
#[derive(Debug, Clone)]
pub struct UStepper {
    model: Model,
    state: SimState,
    nonlinear: bool,
    gradient: History<HalfLinePair<f64>>,
    slope: HalfLinePair<f64>,
    zero: HalfLinePair<f64>,
    solvers: Vec<ThetaSystem>,
    startup: usize,
}

impl UStepper {
    pub fn new(model: Model, state: SimState, nonlinear: bool) -> Self {
        let slope = model.slope();
        let zero = HalfLinePair::zeros(model.grid);
        Self {
            model,
            state,
            nonlinear,
            gradient: History::default(),
            slope,
            zero,
            solvers: Vec::new(),
            startup: DAMPED_STEPS,
        }
    }

    fn row(&self) -> InterfaceRow<f64> {
        let inv = 1.0 / self.model.grid.h();
        InterfaceRow {
            center: -3.0 * inv,
            low: [2.0 * inv, -0.5 * inv],
            high: [2.0 * inv, -0.5 * inv],
        }
    }
}

impl Stepper for UStepper {
    fn state(&self) -> &SimState {
        &self.state
    }

    fn model(&self) -> &Model {
        &self.model
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let mut startup = self.startup;
        let r = damped_step(self, &mut startup, dt, Self::substep);
        self.startup = startup;
        r
    }
}

impl UStepper {
    fn substep(&mut self, dt: f64, theta: f64) -> Result<()> {
        let s = &self.state;
        let t = s.t;
        // advection direction per unit velocity
        let direction = if self.nonlinear {
            self.gradient.push(t, centered_pair(&s.v));
            let vy = self.gradient.at(t + theta * dt).ok_or(Error::InvalidState("empty gradient history"))?;
            vy.zip_with(&self.slope, |a, b| a + b)?
        } else {
            self.slope.clone()
        };
        let row = self.row();
        let idx = cached_solver(&mut self.solvers, &self.model, dt, theta, row)?;
        let solver = &self.solvers[idx];
        let base = solver.advance(&s.v, None, 0.0, [0.0; 2]);
        let unit = solver.advance(&self.zero, Some(&direction), 0.0, [0.0; 2]);

        let level = self.model.derived.interface_level;
        let (b0, b1) = (base.at_interface().0, unit.at_interface().0);
        let old = level + s.v.at_interface().0;
        // p dt = ln((K* + v_I(p)) / (K* + v_I^n)), or its linearization
        let mut p = s.eta_dot;
        let mut converged = false;
        for _ in 0..50 {
            let new = level + b0 + p * b1;
            if !(new > 0.0) {
                return Err(Error::InvalidState("interface value of u is not positive"));
            }
            let (res, der) = if self.nonlinear {
                (p * dt - crate::math::ln(new / old), dt - b1 / new)
            } else {
                (p * dt - (new - old) / level, dt - b1 / level)
            };
            let step = res / der;
            p -= step;
            if step.abs() <= 1e-12 * p.abs() + 1e-15 || res == 0.0 {
                converged = true;
                break;
            }
        }
        if !converged || !p.is_finite() {
            return Err(Error::NoConvergence("interface velocity"));
        }
        let v = base.zip_with(&unit, |a, b| a + p * b)?;
        let ratio = v.at_interface().0 / level;
        if !(ratio > -1.0) {
            return Err(Error::InvalidState("interface value of u is not positive"));
        }
        let f = ln1p(ratio);
        let (w, _) = self.model.decompose(&v)?;
        // same regime guard as the remainder formulation
        stefan_velocity(&self.model, &w)?;
        self.state = SimState {
            t: t + dt,
            v,
            w,
            eta: self.model.derived.eta_star + f,
            f,
            eta_dot: p,
        };
        Ok(())
    }
}

/// One row of the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Record {
    pub t: f64,
    pub eta: f64,
    pub norm_w: f64,
    pub norm_v: f64,
    pub w_at_interface: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub eta: f64,
    pub v: HalfLinePair<f64>,
    pub w: HalfLinePair<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Abort {
    pub t: f64,
    #[cfg_attr(feature = "serde", serde(serialize_with = "display"))]
    pub error: Error,
}

#[cfg(feature = "serde")]
fn display<S: serde::Serializer>(e: &Error, s: S) -> core::result::Result<S::Ok, S::Error> {
    s.collect_str(e)
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub formulation: Formulation,
    pub derived: DerivedParams,
    pub grid: Grid,
    pub records: Vec<Record>,
    pub snapshots: Vec<Snapshot>,
    pub abort: Option<Abort>,
    /// Steps where the advection bound forced a smaller step.
    pub halvings: usize,
}

impl SimTrace {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn series(&self, f: impl Fn(&Record) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.t)
    }
}

fn record(state: &SimState, k: &DerivedParams) -> Record {
    Record {
        t: state.t,
        eta: state.eta,
        norm_w: x_norm(&state.w, k),
        norm_v: x_norm(&state.v, k),
        w_at_interface: state.w.at_interface().0,
    }
}

fn snapshot(state: &SimState) -> Snapshot {
    Snapshot {
        t: state.t,
        eta: state.eta,
        v: state.v.clone(),
        w: state.w.clone(),
    }
}

/// Largest explicit advection speed: `|eta'| + max |delta - sigma^2 / 2|`.
fn advection_speed(k: &DerivedParams, eta_dot: f64) -> f64 {
    Side::BOTH
        .iter()
        .map(|&s| (eta_dot + k.drift(s)).abs())
        .fold(0.0, f64::max)
}

/// Builds the stepper for `config` without running it.
pub fn prepare(config: &SimConfig) -> Result<alloc::boxed::Box<dyn Stepper>> {
    config.check()?;
    let k = config.params.derive()?;
    let grid = config.grid(&k)?;
    let model = Model::new(k, grid);
    let v0 = config.initial.sample(&k, grid)?;
    let state = initial_from_profile_perturbation(&model, &v0)?;
    Ok(match config.formulation {
        Formulation::W => alloc::boxed::Box::new(WStepper::new(model, state, config.nonlinear)),
        Formulation::U => alloc::boxed::Box::new(UStepper::new(model, state, config.nonlinear)),
    })
}

/// Runs the configured simulation. Invalid configurations are errors;
/// numerical failures end the run early and are recorded in `abort`.
pub fn simulate(config: &SimConfig) -> Result<SimTrace> {
    let mut stepper = prepare(config)?;
    let k = stepper.model().derived;
    let grid = stepper.model().grid;
    let h = grid.h();
    let mut trace = SimTrace {
        formulation: config.formulation,
        derived: k,
        grid,
        records: alloc::vec![record(stepper.state(), &k)],
        snapshots: Vec::new(),
        abort: None,
        halvings: 0,
    };
    let mut snaps: Vec<f64> = config.snapshot_times.clone();
    snaps.sort_by(f64::total_cmp);
    let mut next_snap = 0;
    let take_snaps = |state: &SimState, next: &mut usize, out: &mut Vec<Snapshot>, last: bool| {
        while *next < snaps.len() && (snaps[*next] <= state.t + 0.5 * config.dt || (last && snaps[*next] <= state.t)) {
            out.push(snapshot(state));
            *next += 1;
        }
    };
    take_snaps(stepper.state(), &mut next_snap, &mut trace.snapshots, false);

    let steps = crate::math::round(config.horizon / config.dt) as usize;
    let mut last_record = 0.0;
    for n in 0..steps {
        let target = (n + 1) as f64 * config.dt;
        let mut result = Ok(());
        while stepper.state().t < target - 1e-9 * config.dt {
            let remaining = target - stepper.state().t;
            let speed = advection_speed(&k, stepper.state().eta_dot);
            let mut dt = remaining;
            while speed * dt > h && dt > 1e-6 * config.dt {
                dt *= 0.5;
            }
            if dt < remaining {
                trace.halvings += 1;
            }
            result = stepper.step(dt);
            if result.is_err() {
                break;
            }
        }
        if let Err(error) = result {
            trace.abort = Some(Abort {
                t: stepper.state().t,
                error,
            });
            break;
        }
        let state = stepper.state();
        if state.t - last_record >= config.record_interval - 1e-9 * config.dt || n + 1 == steps {
            trace.records.push(record(state, &k));
            last_record = state.t;
        }
        take_snaps(state, &mut next_snap, &mut trace.snapshots, n + 1 == steps);
    }
    Ok(trace)
}

/// Weighted sup distance between the price-perturbation fields of two runs
/// on the same grid.
pub fn weighted_distance(a: &HalfLinePair<f64>, b: &HalfLinePair<f64>, k: &DerivedParams) -> Result<f64> {
    Ok(x_norm(&a.zip_with(b, |x, y| x - y)?, k))
}

/// The value `phi(t, x)` and position `s(t)` recovered from a snapshot, plus
/// the distance to the attenuated wave.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Reconstruction {
    pub t: f64,
    /// `s(t) = eta(t) - c t`.
    pub s: f64,
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    /// `phi - e^{-rt} K(x + ct)`.
    pub deviation: Vec<f64>,
}

/// Snapshot at `t`, linearly interpolated between recorded neighbours.
fn snapshot_at(trace: &SimTrace, t: f64) -> Result<Snapshot> {
    let snaps = &trace.snapshots;
    let (first, last) = match (snaps.first(), snaps.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::TimeOutOfRange(t)),
    };
    let tol = 1e-9 * (1.0 + last.t.abs());
    if t < first.t - tol || t > last.t + tol {
        return Err(Error::TimeOutOfRange(t));
    }
    if let Some(s) = snaps.iter().find(|s| (s.t - t).abs() <= tol) {
        return Ok(s.clone());
    }
    let j = snaps.iter().position(|s| s.t > t).ok_or(Error::TimeOutOfRange(t))?;
    let (a, b) = (&snaps[j - 1], &snaps[j]);
    let th = (t - a.t) / (b.t - a.t);
    let mix = |p: &HalfLinePair<f64>, q: &HalfLinePair<f64>| p.zip_with(q, |x, y| x + th * (y - x));
    Ok(Snapshot {
        t,
        eta: a.eta + th * (b.eta - a.eta),
        v: mix(&a.v, &b.v)?,
        w: mix(&a.w, &b.w)?,
    })
}

/// `phi(t, x) = e^{-rt} u(t, y)` with `y = x + ct - eta(t) + eta*`, evaluated at
/// the given `x` by linear interpolation of the snapshot (points outside the
/// simulated window take the far-field value `v = 0`).
pub fn reconstruct_phi(trace: &SimTrace, t: f64, x: &[f64]) -> Result<Reconstruction> {
    let snap = snapshot_at(trace, t)?;
    let k = &trace.derived;
    let wave = WaveProfile::new(*k);
    let f = snap.eta - k.eta_star;
    let decay = exp(-k.params.r * t);
    let mut phi = Vec::with_capacity(x.len());
    let mut deviation = Vec::with_capacity(x.len());
    for &xi in x {
        let moving = xi + k.c * t;
        let y = moving - f;
        let v = interpolate(&snap.v, y);
        // K(y) - K(y + f) without cancellation
        let diff = wave.shift_difference(y, f);
        phi.push(decay * (wave.value(y) + v));
        deviation.push(decay * (v + diff));
    }
    Ok(Reconstruction {
        t,
        s: snap.eta - k.c * t,
        x: x.to_vec(),
        phi,
        deviation,
    })
}

fn interpolate(p: &HalfLinePair<f64>, y: f64) -> f64 {
    let g = &p.grid;
    let eta = g.eta_star();
    let h = g.h();
    let (side, pos) = if y <= eta {
        (Side::Low, (y - g.node(Side::Low, 0)) / h)
    } else {
        (Side::High, (y - eta) / h)
    };
    let v = p.side(side);
    if pos < 0.0 || pos > (v.len() - 1) as f64 {
        return 0.0;
    }
    let i = (pos as usize).min(v.len() - 2);
    let th = pos - i as f64;
    v[i] + th * (v[i + 1] - v[i])
}

/// Per-side weighted distance `sup |phi - e^{-rt} K(x + ct)| / q_J(x)` at the
/// grid nodes of a snapshot mapped to original coordinates.
pub fn reconstruction_distance(trace: &SimTrace, t: f64) -> Result<(f64, f64)> {
    let snap = snapshot_at(trace, t)?;
    let k = &trace.derived;
    let wave = WaveProfile::new(*k);
    let f = snap.eta - k.eta_star;
    let decay = exp(-k.params.r * t);
    let dev = snap.v.map(|side, y, v| {
        let x = y + f - k.c * t;
        decay * (v + wave.shift_difference(y, f)).abs() / k.weight(side, x)
    });
    let sup = |s: Side| dev.side(s).iter().copied().fold(0.0, f64::max);
    Ok((sup(Side::Low), sup(Side::High)))
}

/// Per-side weighted norm of a field (exposed for trace post-processing).
pub fn side_norms(p: &HalfLinePair<f64>, k: &DerivedParams) -> (f64, f64) {
    (x_norm_side(p, k, Side::Low), x_norm_side(p, k, Side::High))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::P0;

    fn model(h: f64, l: f64) -> Model {
        let k = P0.derive().unwrap();
        Model::new(k, Grid::with_extent(h, l, l, k.eta_star).unwrap())
    }

    #[test]
    fn zero_state_is_an_equilibrium() {
        for form in [Formulation::U, Formulation::W] {
            let mut cfg = SimConfig::new(P0, form, InitialData::Zero);
            cfg.l_low = 10.0;
            cfg.l_high = 10.0;
            cfg.horizon = 1000.0 * cfg.dt;
            let tr = simulate(&cfg).unwrap();
            assert!(tr.abort.is_none());
            assert_eq!(tr.records.len(), 1001);
            assert!(tr.records.iter().all(|r| r.norm_w == 0.0 && r.norm_v == 0.0));
        }
    }

    #[test]
    fn zero_horizon_gives_single_record() {
        let mut cfg = SimConfig::new(P0, Formulation::W, InitialData::Zero);
        cfg.horizon = 0.0;
        let tr = simulate(&cfg).unwrap();
        assert_eq!(tr.records.len(), 1);
    }

    #[test]
    fn decomposition_round_trip() {
        let m = model(0.05, 10.0);
        let v0 = InitialData::WeightedBump { amplitude: 1e-3, width: 1.0 }
            .sample(&m.derived, m.grid)
            .unwrap();
        let (w, f) = m.decompose(&v0).unwrap();
        let (v, f2) = m.compose(&w).unwrap();
        assert!((f - f2).abs() < 1e-15);
        let d = v.zip_with(&v0, |a, b| (a - b).abs()).unwrap();
        assert!(d.low.iter().chain(&d.high).all(|&e| e < 1e-12));
        // the interface condition ties f to v(eta*)
        let vi = v0.at_interface().0;
        assert!((f - ln1p(vi / m.derived.interface_level)).abs() < 1e-14);
        let zero = HalfLinePair::zeros(m.grid);
        let (w0, f0) = m.decompose(&zero).unwrap();
        assert_eq!(f0, 0.0);
        assert!(w0.low.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn velocity_matches_scalar_formula() {
        let m = model(0.05, 10.0);
        assert_eq!(stefan_velocity(&m, &HalfLinePair::zeros(m.grid)).unwrap(), 0.0);
        let w = HalfLinePair::from_fn(m.grid, |_, y| 1e-3 * (y - 0.3) * (y - 0.3) * exp(-y * y));
        let v = stefan_velocity(&m, &w).unwrap();
        let wi = w.at_interface().0;
        let h = m.grid.h();
        let l = &w.low;
        let n = l.len() - 1;
        let wy = (3.0 * l[n] - 4.0 * l[n - 1] + l[n - 2]) / (2.0 * h);
        let wyy = (2.0 * l[n] - 5.0 * l[n - 1] + 4.0 * l[n - 2] - l[n - 3]) / (h * h);
        let psi = m.maps.psi(wi).unwrap();
        let dpsi = m.maps.psi_prime(wi).unwrap();
        let kl = m.wave.curvature(Side::Low, m.derived.eta_star);
        let expect = (0.5 * 0.16 * dpsi * wyy + (0.05 - 0.08) * dpsi * wy) / (1.0 - dpsi * (psi * kl + wy));
        assert!((v - expect).abs() < 1e-15 * expect.abs().max(1.0));
    }

    #[test]
    fn regime_exit_is_reported() {
        let m = model(0.05, 10.0);
        // steep left slope drives the denominator below one half
        let w = HalfLinePair::from_fn(m.grid, |s, y| if s == Side::Low { 2.0 * y } else { 0.0 });
        assert!(matches!(stefan_velocity(&m, &w), Err(Error::LeftSmallRegime(_))));
    }

    #[test]
    fn formulations_agree() {
        let mut fields = Vec::new();
        for form in [Formulation::U, Formulation::W] {
            let mut cfg = SimConfig::new(P0, form, InitialData::WeightedBump { amplitude: 1e-3, width: 1.0 });
            cfg.l_low = 20.0;
            cfg.l_high = 20.0;
            cfg.horizon = 5.0;
            cfg.snapshot_times = alloc::vec![5.0];
            let tr = simulate(&cfg).unwrap();
            assert!(tr.abort.is_none());
            fields.push(tr.snapshots[0].v.clone());
        }
        let k = P0.derive().unwrap();
        let d = weighted_distance(&fields[0], &fields[1], &k).unwrap();
        assert!(d < 1e-5, "{d}");
    }

    #[test]
    fn reconstruction_at_start_is_identity() {
        let mut cfg = SimConfig::new(P0, Formulation::U, InitialData::Bump { amplitude: 1e-3, width: 1.0 });
        cfg.l_low = 10.0;
        cfg.l_high = 10.0;
        cfg.horizon = 1.0;
        cfg.snapshot_times = alloc::vec![0.0, 1.0];
        let tr = simulate(&cfg).unwrap();
        let x: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let rec = reconstruct_phi(&tr, 0.0, &x).unwrap();
        let k = P0.derive().unwrap();
        let wave = WaveProfile::new(k);
        let f = tr.snapshots[0].eta - k.eta_star;
        for (xi, p) in x.iter().zip(&rec.phi) {
            let y = xi - f;
            let u = wave.value(y) + interpolate(&tr.snapshots[0].v, y);
            assert!((p - u).abs() < 1e-15);
        }
        assert!(reconstruct_phi(&tr, 2.0, &x).is_err());
        assert!(reconstruct_phi(&tr, 0.5, &x).is_ok());
    }
}
