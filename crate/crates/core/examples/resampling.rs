//! Moving-block, stationary, sieve and wild bootstraps of the sample
//! mean of a dependent series, and a bootstrap unit-root p-value.

use nonstat::bootstrap::{
    block_bootstrap, bootstrap_pvalue, residual_unitroot_bootstrap, sieve_bootstrap, stationary_bootstrap,
    wild_bootstrap, BlockSpec, Multiplier, Tail,
};
use nonstat::series::{simulate_linear_process, simulate_lur_ar, Innovations, LinearProcessSpec, LurSpec};
use nonstat::RngSpec;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn main() -> nonstat::Result<()> {
    let n = 400;
    let b = 999;
    let spec = LinearProcessSpec::ar1_truncated(0.6, 1.0, 50)?;
    let x = simulate_linear_process(&spec, n, RngSpec::new(2, 0))?;
    let target = spec.long_run_variance() / n as f64;
    println!("var(mean): long-run value {target:.5}");

    let mbb = block_bootstrap(&x, &BlockSpec::new(12, true, false)?, mean, b, RngSpec::new(10, 0))?;
    let sb = stationary_bootstrap(&x, 12.0, mean, b, RngSpec::new(11, 0))?;
    let sieve = sieve_bootstrap(&x, 4, mean, b, RngSpec::new(12, 0), false)?;
    let iid = wild_bootstrap(&x.shifted(-x.mean()), Multiplier::Rademacher, mean, b, RngSpec::new(13, 0))?;
    for (name, r) in [("moving block", &mbb), ("stationary", &sb), ("sieve AR(4)", &sieve), ("wild (ignores dependence)", &iid)] {
        println!("{name:>26}: {:.5}", r.variance());
    }

    let y = simulate_lur_ar(&LurSpec::unit_root(), Innovations::Linear(&spec), 0.0, n, RngSpec::new(3, 0))?;
    let reps = residual_unitroot_bootstrap(&y, &BlockSpec::new(8, true, false)?, b, RngSpec::new(14, 0))?;
    let fit = nonstat::unitroot::ols_ar(&y, 1, nonstat::unitroot::Deterministic::None)?;
    let stat = (n - 1) as f64 * (fit.coeffs[0] - 1.0);
    println!("T(rho - 1) = {stat:.3}, bootstrap 5% quantile {:.3}, p-value {:.3}", reps.quantile(0.05), bootstrap_pvalue(stat, &reps, Tail::Left)?);
    Ok(())
}
