//! Simulation runs and their post-processing: decay fits of the trace and of
//! the reconstructed price, graded against the predicted rates.

use ratingwave_core::norms::{fit_decay, fit_decay_auto, DecayFit};
use ratingwave_core::sim::{
    reconstruction_distance, simulate, weighted_distance, Abort, Formulation, SimConfig, SimTrace, Snapshot,
};
use ratingwave_core::{DerivedParams, Result};
use serde::Serialize;

/// Observed rates must reach this fraction of the predicted ones.
pub const RATE_FRACTION: f64 = 0.9;
/// Least acceptable coefficient of determination of a decay fit.
pub const MIN_R_SQUARED: f64 = 0.98;
/// Start of the fit window as a fraction of the horizon.
pub const FIT_START: f64 = 0.1;
/// Internal snapshots spread over the horizon for the reconstruction fits.
pub const DIAGNOSTIC_SNAPSHOTS: usize = 60;

/// Predicted decay rates, with `omega_0 = |spectrum edge|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Targets {
    pub omega0: f64,
    pub decay: f64,
    pub reconstruction_low: f64,
    pub reconstruction_high: f64,
    /// The same two rates in their alternative closed forms, for reference.
    pub reconstruction_low_alternative: f64,
    pub reconstruction_high_alternative: f64,
    pub fraction: f64,
    pub min_r_squared: f64,
}

impl Targets {
    pub fn new(k: &DerivedParams) -> Self {
        let omega0 = k.spectrum_edge.abs();
        let (lo, hi) = k.reconstruction_rates(omega0);
        let (alo, ahi) = k.reconstruction_rates_alternative(omega0);
        Self {
            omega0,
            decay: omega0,
            reconstruction_low: lo,
            reconstruction_high: hi,
            reconstruction_low_alternative: alo,
            reconstruction_high_alternative: ahi,
            fraction: RATE_FRACTION,
            min_r_squared: MIN_R_SQUARED,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedFit {
    pub name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl NamedFit {
    fn new(name: &'static str, r: Result<DecayFit>) -> Self {
        match r {
            Ok(f) => Self { name, fit: Some(f), error: None },
            Err(e) => Self { name, fit: None, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

/// Everything reported about one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunAnalysis {
    pub formulation: Formulation,
    pub final_time: f64,
    pub records: usize,
    pub halvings: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort: Option<Abort>,
    pub targets: Targets,
    pub fits: Vec<NamedFit>,
    pub checks: Vec<Check>,
}

impl RunAnalysis {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn fit(&self, name: &str) -> Option<&DecayFit> {
        self.fits.iter().find(|f| f.name == name).and_then(|f| f.fit.as_ref())
    }
}

/// Snapshot schedule: the requested times plus evenly spaced diagnostics.
pub fn schedule(config: &SimConfig, diagnostics: usize) -> Vec<f64> {
    let mut times = config.snapshot_times.clone();
    if diagnostics > 0 && config.horizon > 0.0 {
        times.extend((0..=diagnostics).map(|i| config.horizon * i as f64 / diagnostics as f64));
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// Runs `config` with the diagnostic snapshots added.
pub fn run(config: &SimConfig, diagnostics: usize) -> Result<SimTrace> {
    let mut c = config.clone();
    c.snapshot_times = schedule(config, diagnostics);
    simulate(&c)
}

/// The snapshot taken for the requested time `t`, if the run got there.
pub fn snapshot_for<'a>(trace: &'a SimTrace, t: f64, dt: f64) -> Option<&'a Snapshot> {
    trace
        .snapshots
        .iter()
        .filter(|s| (s.t - t).abs() <= 0.5 * dt + 1e-9 * (1.0 + t.abs()))
        .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
}

fn rate_check(name: &str, fit: Option<&DecayFit>, target: f64) -> Check {
    let threshold = RATE_FRACTION * target;
    Check {
        name: name.to_string(),
        value: fit.map(|f| f.rate),
        threshold,
        passed: fit.is_some_and(|f| f.rate >= threshold && f.r_squared >= MIN_R_SQUARED),
    }
}

/// Fits and checks for a finished (or aborted) run.
pub fn analyze(trace: &SimTrace) -> RunAnalysis {
    let k = &trace.derived;
    let targets = Targets::new(k);
    let t = trace.times();
    let norm_w = fit_decay_auto(&t, &trace.series(|r| r.norm_w));
    let eta = fit_decay_auto(&t, &trace.series(|r| (r.eta - k.eta_star).abs()));

    let horizon = trace.horizon();
    let window = (FIT_START * horizon, horizon);
    let mut st = Vec::new();
    let mut low = Vec::new();
    let mut high = Vec::new();
    for s in &trace.snapshots {
        if let Ok((a, b)) = reconstruction_distance(trace, s.t) {
            st.push(s.t);
            low.push(a);
            high.push(b);
        }
    }
    let fits = vec![
        NamedFit::new("norm_w", norm_w),
        NamedFit::new("eta", eta),
        NamedFit::new("reconstruction_low", fit_decay(&st, &low, window)),
        NamedFit::new("reconstruction_high", fit_decay(&st, &high, window)),
    ];
    let by = |n: &str| fits.iter().find(|f| f.name == n).and_then(|f| f.fit.as_ref());
    let checks = vec![
        Check {
            name: "completed".into(),
            value: Some(horizon),
            threshold: horizon,
            passed: trace.abort.is_none(),
        },
        rate_check("norm_w_rate", by("norm_w"), targets.decay),
        rate_check("eta_rate", by("eta"), targets.decay),
        rate_check("reconstruction_low_rate", by("reconstruction_low"), targets.reconstruction_low),
        rate_check("reconstruction_high_rate", by("reconstruction_high"), targets.reconstruction_high),
    ];
    RunAnalysis {
        formulation: trace.formulation,
        final_time: horizon,
        records: trace.records.len(),
        halvings: trace.halvings,
        abort: trace.abort.clone(),
        targets,
        fits,
        checks,
    }
}

/// Largest weighted distance between the price perturbations of two runs
/// over the snapshot times both reached.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossDistance {
    pub max_distance: f64,
    /// `max_distance` over the largest perturbation norm seen.
    pub relative: f64,
    pub compared: usize,
}

pub fn cross_distance(a: &SimTrace, b: &SimTrace) -> Result<CrossDistance> {
    let k = &a.derived;
    let mut max_distance = 0.0f64;
    let mut scale = 0.0f64;
    let mut compared = 0;
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        if x.t != y.t {
            break;
        }
        max_distance = max_distance.max(weighted_distance(&x.v, &y.v, k)?);
        scale = scale.max(ratingwave_core::norms::x_norm(&x.v, k));
        compared += 1;
    }
    Ok(CrossDistance {
        max_distance,
        relative: if scale > 0.0 { max_distance / scale } else { 0.0 },
        compared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ratingwave_core::params::P0;
    use ratingwave_core::sim::InitialData;

    #[test]
    fn targets_at_reference_set() {
        let t = Targets::new(&P0.derive().unwrap());
        assert!((t.decay - 0.0028125).abs() < 1e-15);
        assert!((t.reconstruction_low - 0.0365625).abs() < 1e-12);
        assert!((t.reconstruction_high - 0.0178125).abs() < 1e-12);
        assert!((t.reconstruction_high_alternative - 0.0478125).abs() < 1e-12);
    }

    #[test]
    fn schedule_merges_requested_times() {
        let mut c = SimConfig::new(P0, Formulation::W, InitialData::Zero);
        c.horizon = 10.0;
        c.snapshot_times = vec![5.0, 2.5];
        assert_eq!(schedule(&c, 4), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert_eq!(schedule(&c, 0), vec![2.5, 5.0]);
    }

    #[test]
    fn short_run_reports_every_check() {
        let mut c = SimConfig::new(P0, Formulation::W, InitialData::WeightedBump { amplitude: 1e-3, width: 1.0 });
        c.l_low = 10.0;
        c.l_high = 10.0;
        c.h = 0.1;
        c.dt = 0.1;
        c.horizon = 5.0;
        let tr = run(&c, 10).unwrap();
        assert_eq!(tr.snapshots.len(), 11);
        let a = analyze(&tr);
        assert_eq!(a.checks.len(), 5);
        assert!(a.checks[0].passed);
        assert!(a.fit("norm_w").is_some());
        let mut u = c.clone();
        u.formulation = Formulation::U;
        let tu = run(&u, 10).unwrap();
        let d = cross_distance(&tr, &tu).unwrap();
        assert_eq!(d.compared, 11);
        assert!(d.relative < 0.05, "{d:?}");
    }
}
