//! FM-OLS in an endogenous cointegrating regression, followed by the
//! residual-based stationarity statistic and a parameter-stability scan.

use nonstat::coint::{fk_break_test, fmols, shin_vn, simulate_cointegration, BreakPoint, ShinVariance};
use nonstat::lrv::KernelSpec;
use nonstat::RngSpec;

fn main() -> nonstat::Result<()> {
    let n = 400;
    let (y, x) = simulate_cointegration(1.0, &[2.0], 0.8, n, RngSpec::new(21, 0))?;
    let k = KernelSpec::bartlett_default(n);

    let fm = fmols(&y, &x, &k)?;
    println!("OLS slope   {:.4}", fm.beta_ols[1]);
    println!("FM-OLS slope {:.4} (se {:.4}), t for beta = 2: {:.3}", fm.beta_plus[1], fm.se(1), fm.t_ratio(1, 2.0));

    let v = shin_vn(&y, &x, &k, ShinVariance::Kernel)?;
    println!("stationarity statistic V_n = {v:.4}");

    let fk = fk_break_test(&y, &x, &k, BreakPoint::default())?;
    println!("sup F_k = {:.3} at k = {} (chi-square df {})", fk.stat, fk.argmax_k, fk.df);
    Ok(())
}
