//! Monte Carlo properties of the engine and the experiment harness.

use kyleback::engine::{simulate_path, SimConfig};
use kyleback::experiments::{evaluate, mc_estimate, run_paths, sweep, SweepParam, Verdict};
use kyleback::market::catalog::{back_identity, back_lognormal, penalized};
use kyleback::market::{Payoff, SignalModel};
use kyleback::mathcore::kw;
use kyleback::strategies::{StrategyConfig, TargetSpec};

fn bridge(band: f64) -> StrategyConfig {
    StrategyConfig::Bridge { band }
}

#[test]
fn zero_strategy_earns_nothing() {
    let cfg = SimConfig::new(back_identity(), SignalModel::fixed(2.0), StrategyConfig::Zero, 1e-2, 4);
    let s = mc_estimate(&cfg, 500, None).unwrap();
    assert_eq!(s.mean, 0.0);
}

#[test]
fn paths_are_reproducible() {
    let cfg = SimConfig::new(back_identity(), SignalModel::fixed(1.0), bridge(10.0), 1e-3, 8);
    assert_eq!(simulate_path(&cfg, 17).unwrap(), simulate_path(&cfg, 17).unwrap());
    assert_ne!(simulate_path(&cfg, 17).unwrap().b, simulate_path(&cfg, 18).unwrap().b);
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let cfg = SimConfig::new(back_identity(), SignalModel::fixed(1.0), bridge(10.0), 2e-3, 21);
    let one = evaluate(&cfg, 300, Some(1)).unwrap();
    let three = evaluate(&cfg, 300, Some(3)).unwrap();
    assert_eq!(one, three);
}

#[test]
fn bridge_attains_the_closed_form_value() {
    // Psi at the origin for static z under the identity rule is z^2/2 + 1/2.
    for (z, target) in [(1.0, 1.0), (0.0, 0.5), (-1.5, 1.625)] {
        let cfg = SimConfig::new(back_identity(), SignalModel::fixed(z), bridge(10.0), 1e-3, 5);
        let s = mc_estimate(&cfg, 4000, None).unwrap();
        assert!((s.mean - target).abs() < (3.0 * s.stderr).max(0.02), "z = {z}: {} +- {}", s.mean, s.stderr);
    }
}

#[test]
fn truncation_only_binds_at_exit() {
    let narrow = SimConfig::new(back_identity(), SignalModel::fixed(1.0), bridge(1.5), 5e-3, 31);
    let wide = narrow.clone().with_strategy(bridge(3.0));
    let mut compared = 0;
    for i in 0..300 {
        let a = simulate_path(&narrow, i).unwrap();
        if a.y.iter().all(|y| y.abs() < 1.5) {
            assert_eq!(a, simulate_path(&wide, i).unwrap(), "path {i}");
            compared += 1;
        }
    }
    assert!(compared > 100, "{compared}");
}

#[test]
fn upper_bound_holds_for_continuous_strategies() {
    let strategies = [
        StrategyConfig::Zero,
        StrategyConfig::Tracker { target: TargetSpec::Constant(0.1), delta: 0.2 },
        StrategyConfig::Tracker { target: TargetSpec::Knots(vec![[0.0, 0.0], [1.0, 2.0]]), delta: 0.2 },
        bridge(10.0),
    ];
    for st in strategies {
        let cfg = SimConfig::new(back_identity(), SignalModel::fixed(1.0), st.clone(), 4e-4, 12);
        let stats = evaluate(&cfg, 1000, None).unwrap();
        let psi0 = stats.breakdown_means.psi0;
        assert!(stats.wealth.at_most(psi0, 3.0), "{}: {} > {psi0}", st.kind(), stats.wealth.mean);
    }
}

#[test]
fn upper_bound_holds_under_lognormal_prices() {
    let signal = SignalModel::fixed(0.3).with_payoff(Payoff::Exp);
    let cfg = SimConfig::new(back_lognormal(), signal, bridge(10.0), 1e-3, 6);
    let stats = evaluate(&cfg, 1000, None).unwrap();
    assert!(stats.wealth.at_most(stats.breakdown_means.psi0, 3.0));
    assert!((stats.wealth.mean - stats.breakdown_means.psi0).abs() < 4.0 * stats.wealth.stderr + 0.02);
}

#[test]
fn tracker_stays_near_its_target() {
    let delta = 0.2;
    let st = StrategyConfig::Tracker { target: TargetSpec::Knots(vec![[0.0, 0.0], [0.5, 1.0], [1.0, -0.5]]), delta };
    let cfg = SimConfig::new(back_identity(), SignalModel::fixed(1.0), st, 1e-4, 2);
    let target = |t: f64| if t <= 0.5 { 2.0 * t } else { 1.0 - 3.0 * (t - 0.5) };
    let batch = run_paths(&cfg, 200, None, |_, rec| {
        Ok(rec.t.iter().zip(&rec.x).map(|(&t, &x)| (x - target(t)).abs()).fold(0.0, f64::max))
    })
    .unwrap();
    let inside = batch.values.iter().filter(|&&d| d < delta).count();
    assert!(inside * 100 >= 99 * 200, "{inside} of 200");
}

#[test]
fn loading_against_a_quadratic_variation_charge_pays() {
    let st = StrategyConfig::ExploitC { t1: 0.25, t2: 0.75, x1: 0.0, x2: 1.0, b: 0.0, epsilon: None };
    let cfg = SimConfig::new(penalized(back_identity(), 0.5, 0.0), SignalModel::fixed(-3.0), st, 5e-4, 41);
    let r = sweep(&cfg, SweepParam::B, &[0.0, 1.0, 4.0], 1000, None).unwrap();
    let p = &r.points;
    for (lo, hi) in [(0, 1), (1, 2)] {
        let gap = p[hi].mean - p[lo].mean;
        let se = (p[hi].stderr.powi(2) + p[lo].stderr.powi(2)).sqrt();
        assert!(gap > 3.0 * se, "{:?}", r.table());
    }
    assert_eq!(r.verdict, Verdict::Grows);
}

#[test]
fn repeated_jumps_against_a_linear_charge_pay() {
    let st = StrategyConfig::ExploitJ { t1: 0.2, t2: 0.6, x1: 0.0, x2: 1.0, n_jumps: 4, kappa: 1.0, epsilon: None };
    let cfg = SimConfig::new(penalized(back_identity(), 0.0, 0.5), SignalModel::fixed(-5.0), st, 5e-4, 43);
    let r = sweep(&cfg, SweepParam::NJumps, &[4.0, 8.0, 16.0], 1000, None).unwrap();
    let (a, b) = (&r.points[0], &r.points[2]);
    assert!(b.mean - a.mean > 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt(), "{}", r.table());
}

#[test]
fn exploit_c_keeps_the_signal_in_its_band() {
    let st = StrategyConfig::ExploitC { t1: 0.25, t2: 0.75, x1: 0.0, x2: 1.0, b: 2.0, epsilon: None };
    let rule = penalized(back_identity(), 0.5, 0.0);
    let cfg = SimConfig::new(rule, SignalModel::fixed(-3.0), st, 5e-4, 44);
    let batch = run_paths(&cfg, 300, None, |_, rec| {
        let pump: Vec<f64> = rec
            .t
            .iter()
            .zip(&rec.x)
            .filter(|(&t, _)| t > 0.25 + 1e-9 && t < 0.75 - 1e-9)
            .map(|(&t, &x)| kw(&cfg.rule, t, x).unwrap())
            .collect();
        Ok(pump.iter().all(|&r| r > 0.0 && r < 1.0))
    })
    .unwrap();
    assert!(batch.values.iter().all(|&ok| ok));
}
