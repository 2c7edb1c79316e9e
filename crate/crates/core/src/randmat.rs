//! Sample-covariance spectra and the Marchenko-Pastur law.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::series::{normals, RngSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Aspect ratio `p / n`.
    pub ratio: f64,
    /// Trace of `X X' / n`, for the trace identity.
    pub trace: f64,
}

/// Eigenvalues of `X X' / n` for a `p x n` data matrix.
pub fn spectrum_of(x: &DMatrix<f64>) -> Result<SpectrumResult> {
    let (p, n) = x.shape();
    if p == 0 || n == 0 {
        return Err(Error::Size("data matrix is empty".into()));
    }
    let s = (x * x.transpose()) / n as f64;
    let s = (&s + s.transpose()) * 0.5;
    let trace = s.trace();
    let mut eigenvalues: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumResult {
        lambda_min: eigenvalues[0],
        lambda_max: eigenvalues[p - 1],
        eigenvalues,
        ratio: p as f64 / n as f64,
        trace,
    })
}

/// Spectrum of the sample covariance of `n` iid standard normal vectors
/// in dimension `p`. `p > n` (which forces zero eigenvalues) needs
/// `allow_wide`.
pub fn sample_cov_spectrum(n: usize, p: usize, rng: RngSpec, allow_wide: bool) -> Result<SpectrumResult> {
    if n == 0 || p == 0 {
        return Err(Error::Size("need n >= 1 and p >= 1".into()));
    }
    if p > n && !allow_wide {
        return Err(Error::spec(format!("p = {p} exceeds n = {n}; pass allow_wide to accept zero eigenvalues")));
    }
    let z = normals(&mut rng.rng(), n * p);
    spectrum_of(&DMatrix::from_vec(p, n, z))
}

/// Largest `||A v - lambda v|| / ||A||` over the eigenpairs of a symmetric matrix.
pub fn max_eigen_residual(a: &DMatrix<f64>) -> f64 {
    let eig = a.clone().symmetric_eigen();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    (0..a.nrows())
        .map(|i| {
            let v = eig.eigenvectors.column(i);
            (a * v - v * eig.eigenvalues[i]).norm() / scale
        })
        .fold(0.0, f64::max)
}

fn support(gamma: f64) -> (f64, f64) {
    let r = gamma.sqrt();
    ((1.0 - r).powi(2), (1.0 + r).powi(2))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("aspect ratio {gamma} outside (0, 1]")));
    }
    Ok(())
}

/// Support `[(1 - sqrt(gamma))^2, (1 + sqrt(gamma))^2]`.
pub fn mp_support(gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    Ok(support(gamma))
}

/// `sqrt((x+ - x)(x - x-)) / (2 pi x gamma)` on the support, 0 elsewhere.
pub fn mp_density(x: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let (lo, hi) = support(gamma);
    if x <= 0.0 || x <= lo || x >= hi {
        return Ok(0.0);
    }
    Ok(((hi - x) * (x - lo)).sqrt() / (2.0 * std::f64::consts::PI * x * gamma))
}

/// Distribution function of the law, by Simpson quadrature after the
/// substitution `x = lo + (hi - lo)(1 - cos t)/2`, which removes the
/// square-root endpoint behavior.
pub fn mp_cdf(x: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let (lo, hi) = support(gamma);
    if x <= lo {
        return Ok(0.0);
    }
    if x >= hi {
        return Ok(1.0);
    }
    let half = (hi - lo) / 2.0;
    let upper = (1.0 - (x - lo) / half).clamp(-1.0, 1.0).acos();
    let f = |t: f64| {
        let xt = lo + half * (1.0 - t.cos());
        let s = t.sin();
        if xt <= 0.0 {
            // gamma = 1 at t = 0, where the integrand tends to half / (pi gamma)
            return half / (std::f64::consts::PI * gamma);
        }
        half * half * s * s / (2.0 * std::f64::consts::PI * xt * gamma)
    };
    let m = 2000;
    let h = upper / m as f64;
    let mut acc = f(0.0) + f(upper);
    for i in 1..m {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    Ok((acc * h / 3.0).clamp(0.0, 1.0))
}

/// Kolmogorov distance between the empirical spectral distribution and
/// the Marchenko-Pastur distribution function.
pub fn esd_ks_distance(eigenvalues: &[f64], gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let mut s = eigenvalues.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in s.iter().enumerate() {
        let f = mp_cdf(*v, gamma)?;
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Largest gap between a histogram density of the eigenvalues on `bins`
/// equal bins over the support and the law's average density per bin.
pub fn esd_histogram_deviation(eigenvalues: &[f64], gamma: f64, bins: usize) -> Result<f64> {
    check_gamma(gamma)?;
    if bins == 0 {
        return Err(Error::spec("need at least one bin"));
    }
    let (lo, hi) = support(gamma);
    let w = (hi - lo) / bins as f64;
    let n = eigenvalues.len() as f64;
    let mut counts = vec![0usize; bins];
    for v in eigenvalues {
        if *v >= lo && *v < hi {
            counts[(((v - lo) / w) as usize).min(bins - 1)] += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for (b, c) in counts.iter().enumerate() {
        let a = lo + b as f64 * w;
        let mass = mp_cdf(a + w, gamma)? - mp_cdf(a, gamma)?;
        worst = worst.max((*c as f64 / (n * w) - mass / w).abs());
    }
    Ok(worst)
}
