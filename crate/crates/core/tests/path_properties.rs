//! Path-wise comparative statics under common random numbers.

use pension_ruin::cashflows::CashflowSchedule;
use pension_ruin::engine::{simulate_path, SimulationConfig};
use pension_ruin::return_models::EquityReturnParams;
use pension_ruin::yield_curve::{safe_returns, SpotCurve};
use proptest::prelude::*;

fn config(
    a0: f64,
    alpha: f64,
    mu: f64,
    sigma: f64,
    rate: f64,
    payment: f64,
    seed: u64,
) -> SimulationConfig<f64> {
    let schedule = CashflowSchedule::new(2021, vec![payment; 40]).unwrap();
    let safe = safe_returns(&SpotCurve::flat(rate), 0.5, 40).unwrap();
    let mut c = SimulationConfig::new(
        a0,
        alpha,
        EquityReturnParams::new(mu, sigma).unwrap(),
        safe,
        schedule,
    )
    .unwrap();
    c.seed = seed;
    c
}

fn no_worse(base: &SimulationConfig<f64>, better: &SimulationConfig<f64>, idx: u64) -> bool {
    let b = simulate_path(base, idx).unwrap();
    let o = simulate_path(better, idx).unwrap();
    let exhaustion_ok = match (b.exhaustion_period, o.exhaustion_period) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => y >= x,
    };
    exhaustion_ok && b.assets.iter().zip(&o.assets).all(|(x, y)| y >= x)
}

proptest! {
    #[test]
    fn more_initial_assets_never_hurts(
        a0 in 0.0..150.0f64, extra in 0.0..50.0f64, alpha in 0.0..=1.0f64,
        mu in -0.05..0.1f64, sigma in 0.0..0.4f64, rate in -3.0..3.0f64,
        payment in 0.0..6.0f64, seed: u64, idx in 0u64..1000,
    ) {
        let base = config(a0, alpha, mu, sigma, rate, payment, seed);
        let richer = config(a0 + extra, alpha, mu, sigma, rate, payment, seed);
        prop_assert!(no_worse(&base, &richer, idx));
    }

    #[test]
    fn higher_mean_return_never_hurts(
        a0 in 0.0..150.0f64, alpha in 0.0..=1.0f64, mu in -0.05..0.1f64, bump in 0.0..0.05f64,
        sigma in 0.0..0.4f64, payment in 0.0..6.0f64, seed: u64, idx in 0u64..1000,
    ) {
        let base = config(a0, alpha, mu, sigma, -1.0, payment, seed);
        let better = config(a0, alpha, mu + bump, sigma, -1.0, payment, seed);
        prop_assert!(no_worse(&base, &better, idx));
    }
}
