//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ratingwave::resolvent_probe;
use ratingwave::run::{analyze, run, RunAnalysis, DIAGNOSTIC_SNAPSHOTS, MIN_R_SQUARED, RATE_FRACTION};
use ratingwave_core::dispersion::{
    confirmation_rect, dispersion, evaluate_conditions, root_search_jittered, ContourOptions, Strictness,
};
use ratingwave_core::norms::{derivatives, equivalence_check, x_norm};
use ratingwave_core::params::{self, FinancialParams, P0};
use ratingwave_core::resolvent::{direct_solve, resolvent_apply, resolvent_norm_scan, resolvent_residual, Probe};
use ratingwave_core::sim::{simulate, weighted_distance, Formulation, InitialData, SimConfig, SimTrace};
use ratingwave_core::{DerivedParams, Grid, HalfLinePair, InterfaceMaps, Side, WaveProfile, C64};

/// Empirical bound on |lambda| ||R(lambda) f|| / ||f|| over the probes.
const RATIO_BOUND: f64 = 2.0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn report(n: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let ok = o.passed && took <= budget;
    println!(
        "{} {n}. {name}: {} [{:.2} s of {} s]",
        if ok { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

/// Admissible tuple sampled through the ratios.
fn random_params(rng: &mut impl Rng) -> FinancialParams {
    let delta = rng.random_range(0.01..0.2);
    let c_l: f64 = rng.random_range(0.05..0.95);
    let c_h: f64 = rng.random_range(1.05..=3.0);
    let gamma = rng.random_range(0.05..0.95);
    let r = rng.random_range(0.001..0.1);
    FinancialParams::new(delta, gamma, r, (2.0 * delta / c_h).sqrt(), (2.0 * delta / c_l).sqrt())
}

fn tuples(seed: u64, n: usize, with_reference: bool) -> Vec<DerivedParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<DerivedParams> = Vec::new();
    if with_reference {
        out.push(P0.derive().unwrap());
    }
    out.extend((0..n).map(|_| random_params(&mut rng).derive().unwrap()));
    out
}

fn steady_suite() -> Outcome {
    let mut residual = 0.0f64;
    let mut c1 = 0.0f64;
    let mut level = 0.0f64;
    let mut fd = 0.0f64;
    for k in tuples(1, 200, true) {
        let w = WaveProfile::new(k);
        let e = k.eta_star;
        for side in Side::BOTH {
            let dir = if side == Side::Low { -1.0 } else { 1.0 };
            for i in 1..=1000 {
                let y = e + dir * 20.0 * i as f64 / 1000.0;
                residual = residual.max(w.ode_residual(y).unwrap().abs());
                if i % 100 == 0 {
                    // derivative formulas against central differences of the values
                    let d = 1e-3;
                    let v = |t: f64| w.value_on(side, t);
                    let s = (v(y - 2.0 * d) - 8.0 * v(y - d) + 8.0 * v(y + d) - v(y + 2.0 * d)) / (12.0 * d);
                    let c = (-v(y - 2.0 * d) + 16.0 * v(y - d) - 30.0 * v(y) + 16.0 * v(y + d) - v(y + 2.0 * d))
                        / (12.0 * d * d);
                    fd = fd.max((s - w.slope(side, y)).abs()).max((c - w.curvature(side, y)).abs());
                }
            }
        }
        c1 = c1
            .max((w.value_on(Side::Low, e) - w.value_on(Side::High, e)).abs())
            .max((w.slope(Side::Low, e) - w.slope(Side::High, e)).abs());
        level = level.max((w.value(e) - k.params.gamma * e.exp()).abs());
    }
    outcome(
        residual < 1e-10 && c1 < 1e-12 && level < 1e-12 && fd < 1e-7,
        format!(
            "201 tuples x 2000 points: max ODE residual {residual:.1e}, C1 defect {c1:.1e}, \
             level defect {level:.1e}, derivative-vs-difference {fd:.1e}"
        ),
    )
}

fn inversion_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut slope = 0.0f64;
    for k in tuples(3, 200, true) {
        let m = InterfaceMaps::new(&k);
        for _ in 0..50 {
            let x = k.x0 + rng.random_range(1e-3..1.0) * (3.0 - k.x0);
            let back = m.psi(m.phi(x)).unwrap();
            worst = worst.max((back - x).abs() / (1.0 + x.abs()));
            let w = m.phi(x);
            let inv = m.lambda_inverse(m.lambda(w).unwrap()).unwrap();
            worst = worst.max((inv - w).abs() / (1.0 + w.abs()));
        }
        let p = k.params;
        let expect = (-k.eta_star).exp() * p.sigma_l * p.sigma_l / (2.0 * p.gamma * p.delta);
        slope = slope.max((m.psi_slope_at_zero() - expect).abs());
    }
    let p0 = InterfaceMaps::new(&P0.derive().unwrap()).psi_slope_at_zero();
    outcome(
        worst < 1e-12 && slope < 1e-12 && (p0 - 2.0).abs() < 1e-12,
        format!("round trips {worst:.1e}, slope at zero {slope:.1e}, reference slope {p0}"),
    )
}

fn spectral_suite() -> Outcome {
    let mut d0 = 0.0f64;
    let mut windings = 0i64;
    let mut failures = 0usize;
    let mut unstable = 0usize;
    let mut disc = 0.0f64;
    let opts = ContourOptions::default();
    for k in tuples(4, 100, false) {
        let s = k.spectral();
        let v = dispersion(&s, C64::new(0.0, 0.0));
        d0 = d0.max((v.re - (k.a + k.c_h - k.c_l)).abs()).max(v.im.abs());
        match confirmation_rect(&s, 50.0).and_then(|r| root_search_jittered(&s, &r, &opts)) {
            Ok(r) => windings += r.winding.abs(),
            Err(_) => failures += 1,
        }
        let rep = evaluate_conditions(&s, Strictness::AsPrinted);
        if !rep.condition_verdict.is_stable() {
            unstable += 1;
        }
        let scale = rep.delta_disc.abs().max(rep.delta_disc_tables.abs()).max(f64::MIN_POSITIVE);
        disc = disc.max((rep.delta_disc - rep.delta_disc_tables).abs() / scale);
    }
    outcome(
        d0 < 1e-12 && windings == 0 && failures == 0 && unstable == 0 && disc < 1e-9,
        format!(
            "100 tuples: D(0) defect {d0:.1e}, total winding {windings}, contour failures {failures}, \
             verdicts not stable {unstable}, Delta path gap {disc:.1e}"
        ),
    )
}

fn resolvent_suite() -> Outcome {
    let k = P0.derive().unwrap();
    let grid = Grid::with_extent(0.01, 20.0, 20.0, k.eta_star).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut cont, mut jump, mut residual) = (0.0f64, 0.0f64, 0.0f64);
    let mut scaled = Vec::new();
    for _ in 0..50 {
        let re = 10f64.powf(rng.random_range(0.0..=4.0));
        let lambda = C64::new(re, re * rng.random_range(-1.0..1.0));
        let f = resolvent_probe(&mut rng).sample(&k, grid);
        let a = rng.random_range(-1.0..1.0);
        let nf = x_norm(&f, &k);
        let out = resolvent_apply(&k, lambda, &f, a).unwrap();
        cont = cont.max(out.continuity_defect / (1.0 + nf));
        jump = jump.max(out.jump_defect / (1.0 + nf));
        residual = residual.max(resolvent_residual(&k, lambda, &f, &out.w).unwrap().max() / (1.0 + nf));
        let w = resolvent_apply(&k, lambda, &f, 0.0).unwrap().w;
        scaled.push((lambda.norm(), lambda.norm() * x_norm(&w, &k) / nf));
    }
    // one constant must cover every probe and the real scan
    let m = scaled.iter().map(|s| s.1).fold(0.0, f64::max);
    let top = scaled.iter().filter(|s| s.0 >= 1e3).map(|s| s.1).fold(0.0, f64::max);
    let scan = resolvent_norm_scan(&k, grid, &[10.0, 1e2, 1e3, 1e4].map(|x| C64::new(x, 0.0))).unwrap();
    let scan_max = scan.iter().map(|r| r.scaled).fold(0.0, f64::max);
    let bounded = m <= RATIO_BOUND && scan_max <= RATIO_BOUND;

    let lambda = C64::new(1.0, 1.0);
    let mut errs = Vec::new();
    for h in [0.04, 0.02, 0.01] {
        let g = Grid::with_extent(h, 16.0, 16.0, k.eta_star).unwrap();
        let f = Probe::FAMILY[3].sample(&k, g);
        let exact = resolvent_apply(&k, lambda, &f, 0.5).unwrap().w;
        let direct = direct_solve(&k, lambda, &f, 0.5).unwrap();
        errs.push(x_norm(&exact.zip_with(&direct, |a, b| a - b).unwrap(), &k));
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ordered = orders.iter().all(|o| (1.8..=2.2).contains(o));
    outcome(
        cont < 1e-9 && jump < 1e-8 && residual < 1e-6 && bounded && ordered,
        format!(
            "50 probes: continuity {cont:.1e}, jump {jump:.1e}, residual {residual:.1e}; \
             |lambda| ratio {m:.3} <= {RATIO_BOUND} (top decade {top:.3}, real scan {scan_max:.3}); \
             direct-solve orders {:.2}, {:.2}",
            orders[0], orders[1]
        ),
    )
}

fn reference_config(form: Formulation) -> SimConfig {
    let mut c = SimConfig::new(P0, form, InitialData::WeightedBump { amplitude: 1e-3, width: 1.0 });
    c.h = 0.05;
    c.dt = 0.05;
    c.l_low = 60.0;
    c.l_high = 60.0;
    c.horizon = 3000.0;
    c.record_interval = 3.0;
    c
}

fn refinement_gap(h: f64) -> f64 {
    let final_v = |form| {
        let mut c = SimConfig::new(P0, form, InitialData::WeightedBump { amplitude: 1e-2, width: 1.0 });
        c.h = h;
        c.dt = h;
        c.l_low = 16.0;
        c.l_high = 16.0;
        c.horizon = 2.0;
        c.snapshot_times = vec![2.0];
        let tr = simulate(&c).unwrap();
        tr.snapshots.last().unwrap().v.clone()
    };
    let k = P0.derive().unwrap();
    weighted_distance(&final_v(Formulation::U), &final_v(Formulation::W), &k).unwrap()
}

fn dynamics_suite(runs: &mut Vec<(SimTrace, RunAnalysis)>) -> Outcome {
    let mut zero = 0.0f64;
    for form in [Formulation::U, Formulation::W] {
        let mut c = reference_config(form);
        c.initial = InitialData::Zero;
        c.horizon = 1000.0 * c.dt;
        c.record_interval = 0.0;
        let tr = simulate(&c).unwrap();
        zero = zero.max(tr.records.iter().map(|r| r.norm_w).fold(0.0, f64::max));
    }
    let mut rates = Vec::new();
    let mut ok = zero < 1e-9;
    for form in [Formulation::W, Formulation::U] {
        let tr = run(&reference_config(form), DIAGNOSTIC_SNAPSHOTS).unwrap();
        let a = analyze(&tr);
        for name in ["norm_w_rate", "eta_rate"] {
            ok &= a.checks.iter().any(|c| c.name == name && c.passed);
        }
        ok &= tr.abort.is_none();
        let fit = |n| a.fit(n).map_or((f64::NAN, f64::NAN), |f| (f.rate, f.r_squared));
        rates.push((form, fit("norm_w"), fit("eta")));
        runs.push((tr, a));
    }
    let target = RATE_FRACTION * P0.derive().unwrap().spectrum_edge.abs();
    let coarse = refinement_gap(0.1);
    let fine = refinement_gap(0.05);
    let ratio = coarse / fine;
    ok &= (3.4..=4.6).contains(&ratio);
    let mut detail = format!("zero data max ||w|| {zero:.1e}; target rate {target:.6} (r2 >= {MIN_R_SQUARED})");
    for (form, w, e) in rates {
        detail += &format!("; {form:?}: ||w|| {:.6} (r2 {:.4}), |eta-eta*| {:.6} (r2 {:.4})", w.0, w.1, e.0, e.1);
    }
    detail += &format!("; U/W gap ratio under refinement {ratio:.2}");
    outcome(ok, detail)
}

fn reconstruction_suite(runs: &[(SimTrace, RunAnalysis)]) -> Outcome {
    let mut ok = !runs.is_empty();
    let mut detail = String::new();
    let mut positive = true;
    for name in params::PRESET_NAMES {
        let k = params::preset(name).unwrap().derive().unwrap();
        let (lo, hi) = k.reconstruction_rates(k.spectrum_edge.abs());
        positive &= lo > 0.0 && hi > 0.0;
    }
    ok &= positive;
    for (tr, a) in runs {
        let t = &a.targets;
        let low = a.fit("reconstruction_low").map_or(f64::NAN, |f| f.rate);
        let high = a.fit("reconstruction_high").map_or(f64::NAN, |f| f.rate);
        ok &= low >= RATE_FRACTION * t.reconstruction_low && high >= RATE_FRACTION * t.reconstruction_high;
        if detail.is_empty() {
            detail = format!(
                "targets 0.9 x ({:.5}, {:.5}); alternative high-side form {:.5} would need {:.5}",
                t.reconstruction_low,
                t.reconstruction_high,
                t.reconstruction_high_alternative,
                RATE_FRACTION * t.reconstruction_high_alternative
            );
        }
        detail += &format!("; {:?}: low {low:.5}, high {high:.5}", tr.formulation);
    }
    detail += &format!("; rates positive for all presets: {positive}");
    outcome(ok, detail)
}

fn smooth_pair(k: &DerivedParams, grid: Grid, rng: &mut impl Rng) -> HalfLinePair<f64> {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-4.0..4.0), rng.random_range(0.5..3.0)))
        .collect();
    let (b, om) = (rng.random_range(-0.5..0.5), rng.random_range(0.1..1.5));
    HalfLinePair::from_fn(grid, |side, y| {
        let z: f64 = bumps.iter().map(|(a, c, s)| a * (-(y - c).powi(2) / (2.0 * s * s)).exp()).sum::<f64>()
            + b * (om * y).sin();
        k.weight(side, y) * z
    })
}

fn norms_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut outside = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..1000 {
        let k = random_params(&mut rng).derive().unwrap();
        let grid = Grid::with_extent(0.05, 10.0, 10.0, k.eta_star).unwrap();
        let p = smooth_pair(&k, grid, &mut rng);
        let e = equivalence_check(&p, &k).unwrap();
        lo = lo.min(e.ratio / e.lower);
        hi = hi.max(e.ratio / e.upper);
        if !e.within {
            outside += 1;
        }
    }
    // weighted error of the difference derivatives against exact ones
    let k = P0.derive().unwrap();
    let mut errs = Vec::new();
    for h in [0.05, 0.025, 0.0125] {
        let grid = Grid::with_extent(h, 8.0, 8.0, k.eta_star).unwrap();
        let z = |y: f64| (-y * y / 2.0).exp() * y.cos();
        let z1 = |y: f64| (-y * y / 2.0).exp() * (-y * y.cos() - y.sin());
        let z2 = |y: f64| (-y * y / 2.0).exp() * ((y * y - 2.0) * y.cos() + 2.0 * y * y.sin());
        let p = HalfLinePair::from_fn(grid, |s, y| k.weight(s, y) * z(y));
        let (d1, d2) = derivatives(&p).unwrap();
        // w = q z with q = e^{-a y}
        let e1 = d1.map(|s, y, v| {
            let a = k.weight_exponent(s);
            v - k.weight(s, y) * (z1(y) - a * z(y))
        });
        let e2 = d2.map(|s, y, v| {
            let a = k.weight_exponent(s);
            v - k.weight(s, y) * (z2(y) - 2.0 * a * z1(y) + a * a * z(y))
        });
        errs.push(x_norm(&e1, &k) + x_norm(&e2, &k));
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    outcome(
        outside == 0 && orders.iter().all(|o| (1.8..=2.2).contains(o)),
        format!(
            "1000 pairs: {outside} outside the bracket (ratio/lower >= {lo:.3}, ratio/upper <= {hi:.3}); \
             derivative orders {:.2}, {:.2}",
            orders[0], orders[1]
        ),
    )
}

fn main() {
    let mut all = true;
    all &= report(1, "steady wave", Duration::from_secs(5), steady_suite);
    all &= report(2, "interface maps", Duration::from_secs(1), inversion_suite);
    all &= report(3, "spectrum", Duration::from_secs(60), spectral_suite);
    all &= report(4, "resolvent", Duration::from_secs(120), resolvent_suite);
    let mut runs = Vec::new();
    all &= report(5, "dynamics", Duration::from_secs(300), || dynamics_suite(&mut runs));
    all &= report(6, "reconstruction", Duration::from_secs(60), || reconstruction_suite(&runs));
    all &= report(7, "norms", Duration::from_secs(30), norms_suite);
    if !all {
        std::process::exit(1);
    }
}
