//! Out-of-sample comparison of a constant-only forecast with one that adds
//! a persistent predictor, using recursive estimation windows.

use nalgebra::DMatrix;
use nonstat::mc::nested_forecast_test;
use nonstat::series::{simulate_predictive_system, LurSpec, SystemSpec};
use nonstat::{MultiSeries, RngSpec};

fn main() -> nonstat::Result<()> {
    let n = 400;
    for beta in [0.0, 0.1, 0.3] {
        let sys = SystemSpec::scalar(beta, LurSpec::new(-5.0, 1.0)?, 0.0);
        let (y, x) = simulate_predictive_system(&sys, n, RngSpec::new(12, 0))?;
        // Row t holds what is known at t; the forecast target is y[t+1].
        let ones = MultiSeries::new(DMatrix::from_element(n, 1, 1.0))?;
        let r = nested_forecast_test(&y, &ones, &x, n / 2)?;
        println!("beta = {beta}: statistic {:8.3} from origin {} (sigma2 {:.3})", r.stat, r.start, r.sigma2);
    }
    Ok(())
}
