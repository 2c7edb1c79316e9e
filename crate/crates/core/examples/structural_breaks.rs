//! sup-Wald, Nyblom-type LM and moving-estimates monitoring on a
//! predictive regression whose slope shifts halfway through.

use nalgebra::DMatrix;
use nonstat::breaks::{lm_nyblom, me_monitor, sup_wald};
use nonstat::series::{simulate_predictive_system, LurSpec, SystemSpec};
use nonstat::{MultiSeries, RngSpec, TimeSeries};

fn main() -> nonstat::Result<()> {
    let n = 600;
    let sys = SystemSpec::scalar(0.0, LurSpec::new(-5.0, 0.75)?, 0.0);
    let (y0, x) = simulate_predictive_system(&sys, n, RngSpec::new(4, 0))?;
    // Add a slope of 0.3 on x_{t-1} from the midpoint on.
    let xv = x.column(0);
    let y: Vec<f64> = (0..n)
        .map(|t| y0.values()[t] + if t > n / 2 { 0.3 * xv.values()[t - 1] } else { 0.0 })
        .collect();
    let y = TimeSeries::new(y)?;

    let trim = (0.15, 0.85);
    let scan = sup_wald(&y, &x, trim, true)?.with_critical_values(1, trim, 5000, RngSpec::new(1, 0))?;
    let cv = scan.critical_values.as_ref().and_then(|t| t.get(0.95)).expect("tabulated");
    println!("sup-Wald {:.2} at pi = {:.3}; 5% critical value {cv:.2}", scan.sup_stat, scan.argmax_pi);

    let lm = lm_nyblom(&y, &x)?;
    println!("LM {:.3}, LM1 {:.3}, LM2 {:.3}", lm.lm, lm.lm1, lm.lm2);

    // Monitoring uses a contemporaneous design with an explicit intercept.
    let design = MultiSeries::new(DMatrix::from_fn(n, 2, |t, j| if j == 0 { 1.0 } else { xv.values()[t] }))?;
    let me = me_monitor(&y0, &design, 0.25, n / 2)?;
    println!("ME max {:.3} at k = {} (window {})", me.max_stat, me.argmax_k, me.window);
    Ok(())
}
