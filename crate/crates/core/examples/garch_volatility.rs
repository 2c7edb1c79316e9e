//! Simulate a GARCH(1,1), recover it by Gaussian QMLE and compare the
//! filtered variance with the truth.

use nonstat::garch::{garch_filter, garch_qmle, max_param_error, simulate_garch, GarchSpec, QmleOptions};
use nonstat::RngSpec;

fn main() -> nonstat::Result<()> {
    let truth = GarchSpec::new(0.1, 0.1, 0.8, 0.0)?;
    let (y, sigma2) = simulate_garch(&truth, 10_000, RngSpec::new(17, 0))?;
    let init = GarchSpec::new(0.05, 0.05, 0.9, 0.0)?;
    let fit = garch_qmle(&y, &init, &QmleOptions::default())?;
    let s = &fit.spec;
    println!("omega {:.4} alpha {:.4} beta {:.4} after {} iterations", s.omega, s.alpha, s.beta, fit.iterations);
    println!("max parameter error {:.4}", max_param_error(s, &truth));

    let eps = y.shifted(-s.mu);
    let filtered = garch_filter(&eps, s, s.unconditional_variance())?;
    let ratio: f64 = filtered.values().iter().zip(sigma2.values()).map(|(f, t)| f / t).sum::<f64>() / y.len() as f64;
    println!("mean filtered / true variance {ratio:.4}");
    Ok(())
}
