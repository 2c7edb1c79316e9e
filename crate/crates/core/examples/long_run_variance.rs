//! Kernel long-run variance of an AR(1) against its closed form
//! `sigma^2 / (1 - phi)^2`, across kernels and bandwidths.

use nonstat::lrv::{default_bandwidth, hac_lrv_scalar, KernelFamily, KernelSpec};
use nonstat::series::{simulate_linear_process, LinearProcessSpec};
use nonstat::RngSpec;

fn main() -> nonstat::Result<()> {
    let phi = 0.5;
    let n = 20_000;
    // MA(inf) truncated far enough that the tail is negligible.
    let spec = LinearProcessSpec::ar1_truncated(phi, 1.0, 60)?;
    let x = simulate_linear_process(&spec, n, RngSpec::new(5, 0))?;
    let truth = spec.long_run_variance();
    println!("true long-run variance {truth:.4}");

    let bw = default_bandwidth(n);
    for family in [KernelFamily::Bartlett, KernelFamily::Parzen, KernelFamily::QuadraticSpectral] {
        for scale in [0.5, 1.0, 2.0] {
            let k = KernelSpec::new(family, bw * scale)?;
            let est = hac_lrv_scalar(x.values(), &k, true)?;
            println!("{family:?} b={:6.1}: {est:.4} ({:+.1}%)", bw * scale, 100.0 * (est / truth - 1.0));
        }
    }
    Ok(())
}
