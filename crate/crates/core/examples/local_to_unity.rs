//! Simulate local-to-unity autoregressions for a few values of `c` and
//! check how far the OLS root sits from one.

use nonstat::series::{simulate_lur_ar, Innovations, LinearProcessSpec, LurSpec};
use nonstat::unitroot::{ols_ar, Deterministic};
use nonstat::RngSpec;

fn main() -> nonstat::Result<()> {
    let n = 1000;
    let wn = LinearProcessSpec::white_noise(1.0)?;
    println!("{:>6} {:>10} {:>10} {:>12}", "c", "rho_n", "rho_hat", "n(rho_hat-1)");
    for c in [0.0, -5.0, -20.0, 5.0] {
        let lur = LurSpec::new(c, 1.0)?;
        let x = simulate_lur_ar(&lur, Innovations::Linear(&wn), 0.0, n, RngSpec::new(1, 0))?;
        let fit = ols_ar(&x, 1, Deterministic::None)?;
        let rho_hat = fit.coeffs[0];
        println!("{c:>6} {:>10.5} {rho_hat:>10.5} {:>12.3}", lur.rho(n), n as f64 * (rho_hat - 1.0));
    }

    // Moderate deviations: rho_n = 1 + c / n^gamma with gamma < 1.
    let lur = LurSpec::new(-1.0, 0.5)?;
    println!("gamma = 0.5, c = -1: rho_n = {:.5}", lur.rho(n));
    Ok(())
}
