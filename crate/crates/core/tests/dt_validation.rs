use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpc_core::dt::{self, Binding, DtSplit};
use wpc_core::montecarlo::{realize_slot, simulate_dt, Protocol, SimConfig};
use wpc_core::oracle::{self, ks_critical_1pct, ks_statistic, scan_concavity};
use wpc_core::{channel, db_to_linear, SystemParams};

fn params(gamma_db: f64, theta: f64) -> SystemParams {
    SystemParams {
        gamma_o: db_to_linear(gamma_db),
        theta,
        ..Default::default()
    }
}

#[test]
fn optimizer_matches_grid_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let p = params(rng.random_range(-20.0..0.0), rng.random_range(0.005..0.5));
        let opt = dt::optimize(&p).unwrap();
        let grid = oracle::grid_optimize_dt(&p, 2000).unwrap();
        assert!((opt.alpha_star - grid.alpha).abs() <= grid.step, "{p:?}");
        assert!(opt.throughput >= grid.value - 1e-12);
    }
}

#[test]
fn unconstrained_grid_lands_on_half() {
    let p = SystemParams {
        theta: 1.0,
        ..Default::default()
    };
    let grid = oracle::grid_optimize_dt(&p, 2000).unwrap();
    assert!((grid.alpha - 0.5).abs() <= 1.0 / 2000.0);
}

#[test]
fn grid_refinement_never_loses() {
    let p = params(-10.0, 0.05);
    let coarse = oracle::grid_optimize_dt(&p, 1000).unwrap();
    let fine = oracle::grid_optimize_dt(&p, 10_000).unwrap();
    assert!(fine.value >= coarse.value - 1e-12);
}

#[test]
fn optimum_dominates_feasible_grid() {
    for (g, th) in [(-13.0, 0.05), (-13.0, 0.02), (-5.0, 0.02), (-20.0, 0.1)] {
        let p = params(g, th);
        let opt = dt::optimize(&p).unwrap();
        for i in 1..1000 {
            let a = i as f64 * 1e-3;
            let s = DtSplit::new(a).unwrap();
            if dt::outage(&p, s).unwrap() <= p.theta {
                assert!(opt.throughput >= dt::expected_throughput(&p, s).unwrap() - 1e-9);
            }
        }
    }
}

#[test]
fn high_sir_regime_is_outage_bound() {
    let opt = dt::optimize(&params(-5.0, 0.02)).unwrap();
    assert_eq!(opt.binding, Binding::OutageConstraint);
}

#[test]
fn throughput_is_concave() {
    let p = SystemParams::default();
    let e = |a: f64| dt::expected_throughput(&p, DtSplit::new(a).unwrap()).unwrap();
    assert!(scan_concavity(e, 0.02, 0.98, 49, 1e-4) <= 1e-9);
    assert!(scan_concavity(|x| x * x, -1.0, 1.0, 20, 1e-3) > 0.0);
}

#[test]
fn simulation_mean_at_half() {
    let p = SystemParams::default();
    let sim = simulate_dt(
        &p,
        DtSplit::new(0.5).unwrap(),
        &SimConfig::with_slots(1_000_000, 9),
    )
    .unwrap();
    let exact = 0.5 * std::f64::consts::LOG2_E;
    assert!((sim.mean_throughput - exact).abs() < 3.0 * sim.stderr);
}

#[test]
fn simulation_outage_matches() {
    let p = SystemParams {
        gamma_o: 0.05,
        ..Default::default()
    };
    for (seed, a) in [(1u64, 0.2), (2, 0.5), (3, 0.8)] {
        let split = DtSplit::new(a).unwrap();
        let sim = simulate_dt(&p, split, &SimConfig::with_slots(1_000_000, seed)).unwrap();
        let exact = dt::outage(&p, split).unwrap();
        let se = (exact * (1.0 - exact) / 1e6).sqrt();
        assert!((sim.outage_rate - exact).abs() < 3.0 * se, "alpha {a}");
    }
}

#[test]
fn simulated_sir_distribution_passes_ks() {
    let p = SystemParams::default();
    let split = DtSplit::new(0.3).unwrap();
    let cfg = SimConfig::with_slots(1_000_000, 4);
    let k = dt::sir_scale(&p, split).unwrap();
    let mut g: Vec<f64> = (0..cfg.slots)
        .map(|i| {
            realize_slot(&p, Protocol::Direct(split), &cfg, i)
                .unwrap()
                .gamma_dt
        })
        .collect();
    let d = ks_statistic(&mut g, |x| channel::ratio_cdf(k, x).unwrap());
    assert!(d < ks_critical_1pct(g.len()), "D = {d}");
}

#[test]
fn noise_reduces_simulated_throughput() {
    let quiet = SystemParams::default();
    let noisy = SystemParams {
        sigma2: 1e-3,
        ..quiet
    };
    let split = DtSplit::new(0.5).unwrap();
    let cfg = SimConfig {
        include_noise: true,
        ..SimConfig::with_slots(20_000, 3)
    };
    let a = simulate_dt(&quiet, split, &cfg).unwrap();
    let b = simulate_dt(&noisy, split, &cfg).unwrap();
    assert!(b.mean_throughput < a.mean_throughput);
    assert!(b.outage_rate >= a.outage_rate);
}
