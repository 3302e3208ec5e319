use ratingwave_core::grid::HalfLinePair;
use ratingwave_core::params::P0;
use ratingwave_core::sim::*;

fn config(form: Formulation, h: f64, amplitude: f64) -> SimConfig {
    let mut cfg = SimConfig::new(P0, form, InitialData::WeightedBump { amplitude, width: 1.0 });
    cfg.h = h;
    cfg.dt = h;
    cfg.l_low = 16.0;
    cfg.l_high = 16.0;
    cfg.horizon = 2.0;
    cfg.snapshot_times = vec![2.0];
    cfg
}

fn final_v(cfg: &SimConfig) -> HalfLinePair<f64> {
    let tr = simulate(cfg).unwrap();
    assert!(tr.abort.is_none());
    tr.snapshots.last().unwrap().v.clone()
}

#[test]
fn space_time_refinement_is_second_order() {
    let k = P0.derive().unwrap();
    for form in [Formulation::W, Formulation::U] {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let v: Vec<_> = hs.iter().map(|&h| final_v(&config(form, h, 1e-2))).collect();
        // successive differences on the coarse grid
        let d1 = weighted_distance(&v[0], &v[1].coarsen(2).unwrap(), &k).unwrap();
        let d2 = weighted_distance(&v[1].coarsen(2).unwrap(), &v[2].coarsen(4).unwrap(), &k).unwrap();
        let d3 = weighted_distance(&v[2].coarsen(4).unwrap(), &v[3].coarsen(8).unwrap(), &k).unwrap();
        for ratio in [d1 / d2, d2 / d3] {
            assert!((3.4..=4.6).contains(&ratio), "{form:?}: {ratio}");
        }
    }
}

#[test]
fn formulations_converge_to_each_other() {
    let k = P0.derive().unwrap();
    let gap = |h: f64| {
        let w = final_v(&config(Formulation::W, h, 1e-2));
        let u = final_v(&config(Formulation::U, h, 1e-2));
        weighted_distance(&w, &u, &k).unwrap()
    };
    let (a, b) = (gap(0.05), gap(0.025));
    assert!((3.4..=4.6).contains(&(a / b)), "{a} {b}");
}

#[test]
fn step_doubling_is_second_order() {
    let k = P0.derive().unwrap();
    for form in [Formulation::W, Formulation::U] {
        let diff = |dt: f64| {
            let mut cfg = config(form, 0.01, 1e-1);
            cfg.dt = dt;
            let mut a = prepare(&cfg).unwrap();
            let mut b = prepare(&cfg).unwrap();
            let n = (2.0 / dt).round() as usize;
            for _ in 0..n {
                a.step(dt).unwrap();
            }
            for _ in 0..n / 2 {
                b.step(2.0 * dt).unwrap();
            }
            weighted_distance(&a.state().v, &b.state().v, &k).unwrap()
        };
        let order = (diff(0.05) / diff(0.025)).log2();
        assert!((1.5..=2.5).contains(&order), "{form:?}: {order}");
    }
}

#[test]
fn interface_conditions_hold_along_the_run() {
    let mut jumps = Vec::new();
    for h in [0.05, 0.025] {
        let cfg = config(Formulation::U, h, 1e-2);
        let mut s = prepare(&cfg).unwrap();
        let k = s.model().derived;
        for _ in 0..(2.0 / h) as usize {
            s.step(h).unwrap();
            let st = s.state();
            let u = k.interface_level + st.v.at_interface().0;
            assert!((u - k.params.gamma * st.eta.exp()).abs() < 1e-10);
        }
        jumps.push(slope_jump_estimate(&s.state().v).abs());
    }
    let ratio = jumps[0] / jumps[1];
    assert!(ratio > 3.0, "{jumps:?}");
}

#[test]
fn ansatz_round_trip_on_snapshots() {
    let mut cfg = config(Formulation::U, 0.05, 1e-2);
    cfg.snapshot_times = vec![0.0, 0.5, 1.0, 2.0];
    let tr = simulate(&cfg).unwrap();
    let k = tr.derived;
    let model = Model::new(k, tr.grid);
    for snap in &tr.snapshots {
        let (v, f) = model.compose(&snap.w).unwrap();
        assert!((f - (snap.eta - k.eta_star)).abs() < 1e-11);
        let d = v.zip_with(&snap.v, |a, b| (a - b).abs()).unwrap();
        assert!(d.low.iter().chain(&d.high).all(|&e| e < 1e-11));
    }
}

#[test]
fn deterministic_traces() {
    let cfg = config(Formulation::W, 0.05, 1e-2);
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.snapshots, b.snapshots);
}

#[test]
fn large_perturbations_abort_or_are_rejected() {
    use ratingwave_core::error::Error;
    for form in [Formulation::W, Formulation::U] {
        let run = |amplitude: f64| {
            let mut cfg = config(form, 0.05, 0.0);
            cfg.initial = InitialData::Bump { amplitude, width: 0.3 };
            cfg.horizon = 20.0;
            simulate(&cfg)
        };
        assert!(run(0.1).unwrap().abort.is_none());
        let tr = run(0.4).unwrap();
        assert!(matches!(tr.abort.unwrap().error, Error::LeftSmallRegime(d) if d <= 0.5));
        assert!(tr.records.len() > 1);
        assert!(matches!(run(-0.7), Err(Error::OutOfBasin { .. })));
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = config(Formulation::W, 0.05, 1e-2);
    cfg.dt = 0.0;
    assert!(simulate(&cfg).is_err());
    let mut cfg = config(Formulation::W, 0.05, 1e-2);
    cfg.l_low = 0.5;
    assert!(simulate(&cfg).is_err());
    let mut cfg = config(Formulation::U, 0.05, 1e-2);
    cfg.horizon = f64::NAN;
    assert!(simulate(&cfg).is_err());
}

#[test]
fn linear_decay_approaches_the_edge_from_above() {
    let k = P0.derive().unwrap();
    let edge = k.spectrum_edge.abs();
    let mut rates = Vec::new();
    for l in [20.0, 40.0, 80.0] {
        let mut cfg = SimConfig::new(P0, Formulation::W, InitialData::WeightedBump { amplitude: 1e-3, width: 1.0 });
        cfg.nonlinear = false;
        cfg.h = 0.1;
        cfg.dt = 0.1;
        cfg.l_low = l;
        cfg.l_high = l;
        cfg.horizon = 2000.0;
        cfg.record_interval = 2.0;
        let tr = simulate(&cfg).unwrap();
        let t: Vec<f64> = tr.records.iter().map(|r| r.t).collect();
        let n: Vec<f64> = tr.records.iter().map(|r| r.norm_w).collect();
        rates.push(ratingwave_core::norms::fit_decay_auto(&t, &n).unwrap().rate);
    }
    assert!(rates.iter().all(|&r| r > edge), "{rates:?}");
    assert!(rates.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-3)), "{rates:?}");
}
