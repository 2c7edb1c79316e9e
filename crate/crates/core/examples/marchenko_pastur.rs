//! Sample-covariance eigenvalues against the Marchenko-Pastur law.

use nonstat::randmat::{esd_ks_distance, mp_support, sample_cov_spectrum};
use nonstat::RngSpec;

fn main() -> nonstat::Result<()> {
    for (n, p) in [(400, 100), (2000, 500), (2000, 1000)] {
        let s = sample_cov_spectrum(n, p, RngSpec::new(30, 0), false)?;
        let (lo, hi) = mp_support(s.ratio)?;
        let ks = esd_ks_distance(&s.eigenvalues, s.ratio)?;
        println!(
            "p/n = {:.2}: lambda in [{:.3}, {:.3}], support [{lo:.3}, {hi:.3}], KS to MP {ks:.4}",
            s.ratio, s.lambda_min, s.lambda_max
        );
    }
    Ok(())
}
