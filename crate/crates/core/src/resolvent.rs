//! Explicit resolvent of the linearized operator.
//!
//! On each half-line `(lambda - L) w = f` is solved by the exponential kernels
//! built from the characteristic roots, and the two free constants are fixed
//! by continuity and the jump condition `w_H'(eta*) - w_L'(eta*) - A w(eta*) = a`.
//! The kernels are written for `w'' + (c_J - 1) w' - (2 lambda / sigma_J^2) w = -g`,
//! so the data enters as `g = 2 f / sigma_J^2`.
//!
//! Sampled data is interpolated by piecewise quintics. Each panel integral
//! `int e^{mu (...)} p(s) ds` is linear in six neighbouring samples, so the
//! weights are computed once per `(mu, h)` by adaptive Gauss quadrature and
//! the half-line integrals follow from one-term recursions.

use alloc::vec::Vec;

use crate::coupled::{CoupledSystem, InterfaceRow};
use crate::dispersion::{self, check_right_of_edge, mu, RootSign};
use crate::error::{Error, Result};
use crate::grid::{Grid, HalfLinePair};
use crate::math::ln;
use crate::norms::x_norm;
use crate::params::{DerivedParams, Side, SpectralCoefficients};
use crate::tridiag::Tridiagonal;
use crate::C64;

/// `|D(lambda)|` below this is treated as a point of the spectrum.
pub const SPECTRUM_TOL: f64 = 1e-10;

const GAUSS_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GAUSS_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Points per interpolation stencil (piecewise quintic data).
const POINTS: usize = 6;
/// Stencil start relative to the panel's left node, from centred (`-2`) to
/// fully one-sided (`0` or `-4`).
const OFFSETS: [isize; 5] = [0, -1, -2, -3, -4];

fn lagrange(t: f64, start: isize) -> [f64; POINTS] {
    let node = |m: usize| (start + m as isize) as f64;
    core::array::from_fn(|k| {
        let mut l = 1.0;
        for m in 0..POINTS {
            if m != k {
                l *= (t - node(m)) / (node(k) - node(m));
            }
        }
        l
    })
}

/// `h int_0^1 e^{exponent(t)} l_k(t) dt` for each basis polynomial, halving
/// the Gauss panels until the weights settle to `1e-12` relative.
fn panel_weights(exponent: &dyn Fn(f64) -> C64, start: isize, h: f64) -> [C64; POINTS] {
    let eval = |m: usize| -> [C64; POINTS] {
        let mut acc = [C64::new(0.0, 0.0); POINTS];
        let width = 1.0 / m as f64;
        for p in 0..m {
            let a = p as f64 * width;
            for (x, wg) in GAUSS_X.iter().zip(GAUSS_W) {
                let t = a + 0.5 * width * (x + 1.0);
                let e = exponent(t).exp() * (0.5 * width * wg * h);
                let l = lagrange(t, start);
                for k in 0..POINTS {
                    acc[k] += e * l[k];
                }
            }
        }
        acc
    };
    let mut m = 1;
    let mut prev = eval(m);
    while m < 1 << 14 {
        m *= 2;
        let next = eval(m);
        let scale: f64 = next.iter().map(|w| w.norm()).sum();
        let change: f64 = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).sum();
        prev = next;
        if change <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    prev
}

/// Panel weights for every stencil placement.
struct Kernel {
    step: C64,
    weights: [[C64; POINTS]; OFFSETS.len()],
}

impl Kernel {
    fn build(step: C64, exponent: &dyn Fn(f64) -> C64, h: f64) -> Self {
        Self {
            step,
            weights: core::array::from_fn(|s| panel_weights(exponent, OFFSETS[s], h)),
        }
    }

    /// `int_{y_i}^{y_{i+1}} e^{mu (y_{i+1} - s)} g(s) ds` (integration towards the right).
    fn forward(mu: C64, h: f64) -> Self {
        Self::build((mu * h).exp(), &move |t: f64| mu * (h * (1.0 - t)), h)
    }

    /// `int_{y_i}^{y_{i+1}} e^{mu (y_i - s)} g(s) ds` (integration towards the left).
    fn backward(mu: C64, h: f64) -> Self {
        Self::build((-mu * h).exp(), &move |t: f64| -mu * (h * t), h)
    }

    fn panel(&self, g: &[C64], i: usize) -> C64 {
        let n = g.len() - 1;
        let start = i.saturating_sub(2).min(n + 1 - POINTS);
        let shape = i - start;
        self.weights[shape]
            .iter()
            .zip(&g[start..start + POINTS])
            .fold(C64::new(0.0, 0.0), |acc, (w, v)| acc + w * v)
    }

    /// `out[i] = int_{y_0}^{y_i} e^{mu (y_i - s)} g(s) ds`.
    fn sweep_right(&self, g: &[C64]) -> Vec<C64> {
        let mut out = alloc::vec![C64::new(0.0, 0.0); g.len()];
        for i in 0..g.len() - 1 {
            out[i + 1] = self.step * out[i] + self.panel(g, i);
        }
        out
    }

    /// `out[i] = int_{y_i}^{y_n} e^{mu (y_i - s)} g(s) ds`.
    fn sweep_left(&self, g: &[C64]) -> Vec<C64> {
        let n = g.len() - 1;
        let mut out = alloc::vec![C64::new(0.0, 0.0); g.len()];
        for i in (0..n).rev() {
            out[i] = self.step * out[i + 1] + self.panel(g, i);
        }
        out
    }
}

/// Characteristic roots on both sides at `lambda`.
#[derive(Debug, Clone, Copy)]
struct Roots {
    low_plus: C64,
    low_minus: C64,
    high_plus: C64,
    high_minus: C64,
}

impl Roots {
    fn new(k: &SpectralCoefficients, lambda: C64) -> Self {
        Self {
            low_plus: mu(k, Side::Low, RootSign::Plus, lambda),
            low_minus: mu(k, Side::Low, RootSign::Minus, lambda),
            high_plus: mu(k, Side::High, RootSign::Plus, lambda),
            high_minus: mu(k, Side::High, RootSign::Minus, lambda),
        }
    }

    fn low_gap(&self) -> C64 {
        self.low_plus - self.low_minus
    }

    fn high_gap(&self) -> C64 {
        self.high_plus - self.high_minus
    }
}

/// Interface constants in terms of the two boundary integrals
/// `i_low = int_{-inf}^{eta*} e^{mu_L(-) (eta* - s)} g_L` and
/// `i_high = int_{eta*}^{inf} e^{mu_H(+) (eta* - s)} g_H`.
///
/// Returns the coefficients `(X, Y)` of `e^{mu_L(+) (y - eta*)}` and
/// `e^{mu_H(-) (y - eta*)}`.
fn interface_constants(k: &SpectralCoefficients, r: &Roots, i_low: C64, i_high: C64, a: f64) -> (C64, C64) {
    let d = r.low_plus - r.high_minus + k.a;
    let dl = r.low_gap();
    let dh = r.high_gap();
    let x = (i_high - i_low * (r.low_minus - r.high_minus + k.a) / dl) / d - a / d;
    let y = (i_low - i_high * (r.low_plus - r.high_plus + k.a) / dh) / d - a / d;
    (x, y)
}

/// Residual of the continuity and jump rows for given interface constants.
pub fn interface_system_residual(
    k: &SpectralCoefficients,
    lambda: C64,
    i_low: C64,
    i_high: C64,
    a: f64,
) -> (C64, C64) {
    let r = Roots::new(k, lambda);
    let (x, y) = interface_constants(k, &r, i_low, i_high, a);
    let (dl, dh) = (r.low_gap(), r.high_gap());
    let first = x - y - (i_high / dh - i_low / dl);
    let second = r.low_plus * x + (-r.high_minus + k.a) * y
        - ((r.high_plus - k.a) * i_high / dh - r.low_minus * i_low / dl - a);
    (first, second)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventOutput {
    pub w: HalfLinePair<C64>,
    /// Coefficient of `e^{mu_L(+) y}` in the low branch.
    pub c1: C64,
    /// Coefficient of `e^{mu_H(-) y}` in the high branch.
    pub d1: C64,
    pub dispersion: C64,
    /// One-sided derivatives at the interface, from the kernel representation.
    pub slope_low: C64,
    pub slope_high: C64,
    /// `|w_L(eta*) - w_H(eta*)|`.
    pub continuity_defect: f64,
    /// `|w_H' - w_L' - A w(eta*) - a|`.
    pub jump_defect: f64,
    /// Bound on the integrals dropped beyond the truncated grid, assuming the
    /// data keeps decaying like the weights.
    pub tail_bound: f64,
}

fn scaled_data(k: &DerivedParams, f: &HalfLinePair<C64>) -> (Vec<C64>, Vec<C64>) {
    let s = |side: Side| 2.0 / (k.sigma(side) * k.sigma(side));
    (
        f.low.iter().map(|&v| v * s(Side::Low)).collect(),
        f.high.iter().map(|&v| v * s(Side::High)).collect(),
    )
}

fn check_lambda(k: &SpectralCoefficients, lambda: C64) -> Result<C64> {
    check_right_of_edge(k, lambda)?;
    let d = dispersion::dispersion(k, lambda);
    if !(d.norm() > SPECTRUM_TOL) {
        return Err(Error::NearSpectrum(d.norm()));
    }
    Ok(d)
}

/// Applies `R(lambda)` to `f` with boundary datum `a`.
pub fn resolvent_apply(k: &DerivedParams, lambda: C64, f: &HalfLinePair<C64>, a: f64) -> Result<ResolventOutput> {
    let spec = k.spectral();
    let d = check_lambda(&spec, lambda)?;
    let g = f.grid;
    if g.cells(Side::Low) < POINTS || g.cells(Side::High) < POINTS {
        return Err(Error::GridTooCoarse("interpolation panels need six cells per side"));
    }
    let h = g.h();
    let eta = g.eta_star();
    let r = Roots::new(&spec, lambda);
    let (gl, gh) = scaled_data(k, f);

    let j1 = Kernel::forward(r.low_minus, h).sweep_right(&gl);
    let j2 = Kernel::backward(r.low_plus, h).sweep_left(&gl);
    let k1 = Kernel::forward(r.high_minus, h).sweep_right(&gh);
    let k2 = Kernel::backward(r.high_plus, h).sweep_left(&gh);

    let n = gl.len() - 1;
    let (i_low, i_high) = (j1[n], k2[0]);
    let (x, y) = interface_constants(&spec, &r, i_low, i_high, a);
    let (dl, dh) = (r.low_gap(), r.high_gap());

    let low: Vec<C64> = (0..=n)
        .map(|i| x * (r.low_plus * (g.node(Side::Low, i) - eta)).exp() + (j1[i] + j2[i]) / dl)
        .collect();
    let high: Vec<C64> = (0..gh.len())
        .map(|j| y * (r.high_minus * (g.node(Side::High, j) - eta)).exp() + (k1[j] + k2[j]) / dh)
        .collect();

    let slope_low = r.low_plus * x + r.low_minus * i_low / dl;
    let slope_high = r.high_minus * y + r.high_plus * i_high / dh;
    let w_i = low[n];
    let continuity_defect = (low[n] - high[0]).norm();
    let jump_defect = (slope_high - slope_low - w_i * spec.a - a).norm();

    let tail_low = gl[0].norm() / root_spread_re(&spec, Side::Low, lambda);
    let tail_high = gh[gh.len() - 1].norm() / root_spread_re(&spec, Side::High, lambda);

    Ok(ResolventOutput {
        w: HalfLinePair { grid: g, low, high },
        c1: x * (-r.low_plus * eta).exp(),
        d1: y * (-r.high_minus * eta).exp(),
        dispersion: d,
        slope_low,
        slope_high,
        continuity_defect,
        jump_defect,
        tail_bound: tail_low.max(tail_high),
    })
}

fn root_spread_re(k: &SpectralCoefficients, side: Side, lambda: C64) -> f64 {
    dispersion::root_spread(k, side, lambda).re
}

/// Half-line length beyond which the kernels have decayed by `tol`:
/// `ln(1/tol) / Re sqrt((c_J - 1)^2/4 + 2 lambda / sigma_J^2)`.
pub fn truncation_extent(k: &DerivedParams, lambda: C64, side: Side, tol: f64) -> f64 {
    -ln(tol) / root_spread_re(&k.spectral(), side, lambda)
}

/// `(sigma^2/2) w'' + (delta - sigma^2/2) w'` coefficients, `(diffusion, drift)`.
fn coefficients(k: &DerivedParams, side: Side) -> (f64, f64) {
    (k.diffusion(side), k.drift(side))
}

/// Weighted sup of `lambda w - L w - f` per side.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResidualReport {
    pub low: f64,
    pub high: f64,
    /// Nodes checked per side.
    pub checked: (usize, usize),
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.low.max(self.high)
    }
}

/// Fewest checked nodes per side.
pub const MIN_RESIDUAL_NODES: usize = 8;

/// Fourth-order finite-difference residual. Skips the layers next to the
/// interface and next to both truncation ends where a homogeneous exponential
/// (from the jump condition or from the cut-off kernel tails) has not decayed
/// below `1e-10` in the weighted sense; there the stencil cannot resolve it.
/// At least two cells are always skipped at each end.
pub fn resolvent_residual(
    k: &DerivedParams,
    lambda: C64,
    f: &HalfLinePair<C64>,
    w: &HalfLinePair<C64>,
) -> Result<ResidualReport> {
    if f.grid != w.grid {
        return Err(Error::InvalidGrid("data and solution live on different grids"));
    }
    let spec = k.spectral();
    let g = w.grid;
    let h = g.h();
    let mut sup = [0.0f64; 2];
    let mut checked = [0usize; 2];
    for (s, side) in Side::BOTH.into_iter().enumerate() {
        let v = w.side(side);
        let rhs = f.side(side);
        let n = v.len() - 1;
        let (diff, drift) = coefficients(k, side);
        let decay = root_spread_re(&spec, side, lambda);
        let layer = (-ln(1e-10) / decay / h) as usize + 1;
        let skip = layer.max(2);
        for i in skip..=n.saturating_sub(skip) {
            let d1 = (v[i - 2] - v[i - 1] * 8.0 + v[i + 1] * 8.0 - v[i + 2]) / (12.0 * h);
            let d2 = (-v[i - 2] + v[i - 1] * 16.0 - v[i] * 30.0 + v[i + 1] * 16.0 - v[i + 2]) / (12.0 * h * h);
            let res = lambda * v[i] - (d2 * diff + d1 * drift) - rhs[i];
            let y = g.node(side, i);
            sup[s] = sup[s].max(res.norm() / k.weight(side, y));
            checked[s] += 1;
        }
    }
    if checked[0] < MIN_RESIDUAL_NODES || checked[1] < MIN_RESIDUAL_NODES {
        return Err(Error::GridTooCoarse("fewer than 8 residual nodes on a side"));
    }
    Ok(ResidualReport {
        low: sup[0],
        high: sup[1],
        checked: (checked[0], checked[1]),
    })
}

/// Second-order finite-difference solve of `(lambda - L) w = f` with
/// `w = 0` at both truncation ends, continuity at the shared interface node
/// and the jump row discretized by one-sided three-point stencils.
pub fn direct_solve(k: &DerivedParams, lambda: C64, f: &HalfLinePair<C64>, a: f64) -> Result<HalfLinePair<C64>> {
    let g = f.grid;
    let h = g.h();
    let build = |side: Side| -> (Tridiagonal<C64>, C64, C64) {
        let (diff, drift) = coefficients(k, side);
        let n = g.cells(side) - 1;
        let lower = C64::new(-diff / (h * h) + drift / (2.0 * h), 0.0);
        let upper = C64::new(-diff / (h * h) - drift / (2.0 * h), 0.0);
        let diag = lambda + 2.0 * diff / (h * h);
        (Tridiagonal::constant(n, lower, diag, upper), lower, upper)
    };
    let (low_tri, _, low_link) = build(Side::Low);
    let (high_tri, high_link, _) = build(Side::High);
    let inv = 1.0 / h;
    let row = InterfaceRow {
        center: C64::new(-3.0 * inv - k.a, 0.0),
        low: [C64::new(2.0 * inv, 0.0), C64::new(-0.5 * inv, 0.0)],
        high: [C64::new(2.0 * inv, 0.0), C64::new(-0.5 * inv, 0.0)],
    };
    let sys = CoupledSystem::new(&low_tri, low_link, &high_tri, high_link, row)?;
    let nl = g.cells(Side::Low);
    let nh = g.cells(Side::High);
    let mut low_rhs: Vec<C64> = f.low[1..nl].to_vec();
    let mut high_rhs: Vec<C64> = f.high[1..nh].to_vec();
    let wi = sys.solve(&mut low_rhs, &mut high_rhs, C64::new(a, 0.0));
    let zero = C64::new(0.0, 0.0);
    let mut low = Vec::with_capacity(nl + 1);
    low.push(zero);
    low.extend_from_slice(&low_rhs);
    low.push(wi);
    let mut high = Vec::with_capacity(nh + 1);
    high.push(wi);
    high.extend_from_slice(&high_rhs);
    high.push(zero);
    HalfLinePair::new(g, low, high)
}

/// Data `f = weight * bump` for the probe family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Probe {
    /// Bump centre relative to the interface.
    pub offset: f64,
    pub width: f64,
    pub amplitude_low: f64,
    pub amplitude_high: f64,
}

impl Probe {
    pub const FAMILY: [Probe; 4] = [
        Probe { offset: -1.0, width: 0.5, amplitude_low: 1.0, amplitude_high: 0.0 },
        Probe { offset: 1.0, width: 0.5, amplitude_low: 0.0, amplitude_high: 1.0 },
        Probe { offset: 0.0, width: 1.0, amplitude_low: 1.0, amplitude_high: 1.0 },
        Probe { offset: 0.5, width: 0.3, amplitude_low: 1.0, amplitude_high: -0.5 },
    ];

    pub fn sample(&self, k: &DerivedParams, grid: Grid) -> HalfLinePair<C64> {
        let eta = grid.eta_star();
        HalfLinePair::from_fn(grid, |side, y| {
            let z = (y - eta - self.offset) / self.width;
            let amp = match side {
                Side::Low => self.amplitude_low,
                Side::High => self.amplitude_high,
            };
            C64::new(amp * k.weight(side, y) * crate::math::exp(-0.5 * z * z), 0.0)
        })
    }
}

/// One row of a resolvent norm scan.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScanRow {
    pub lambda: C64,
    /// Largest `||R(lambda) f|| / ||f||` over the probes.
    pub ratio: f64,
    /// `|lambda|` times `ratio`.
    pub scaled: f64,
}

/// Norm ratios over the probe family on `grid` for each `lambda`.
pub fn resolvent_norm_scan(k: &DerivedParams, grid: Grid, lambdas: &[C64]) -> Result<Vec<ScanRow>> {
    let probes: Vec<HalfLinePair<C64>> = Probe::FAMILY.iter().map(|p| p.sample(k, grid)).collect();
    lambdas
        .iter()
        .map(|&lambda| {
            let mut ratio = 0.0f64;
            for f in &probes {
                let out = resolvent_apply(k, lambda, f, 0.0)?;
                ratio = ratio.max(x_norm(&out.w, k) / x_norm(f, k));
            }
            Ok(ScanRow {
                lambda,
                ratio,
                scaled: lambda.norm() * ratio,
            })
        })
        .collect()
}
