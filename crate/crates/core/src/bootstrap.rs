//! Resampling schemes for dependent data: block, stationary, AR-sieve,
//! wild, and the residual-based unit-root bootstrap, plus bootstrap
//! p-values.
//!
//! Replicate `b` draws from stream `rng.offset(b)`, so results do not
//! depend on scheduling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::unitroot::{ols_ar, Ar1Regression, Deterministic};
use crate::series::{RngSpec, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub length: usize,
    pub overlap: bool,
    /// Wrap blocks past the end back to the start of the series.
    pub circular: bool,
}

impl BlockSpec {
    pub fn new(length: usize, overlap: bool, circular: bool) -> Result<Self> {
        if length == 0 {
            return Err(Error::spec("block length must be >= 1"));
        }
        Ok(BlockSpec { length, overlap, circular })
    }

    /// Circular overlapping blocks.
    pub fn circular(length: usize) -> Result<Self> {
        BlockSpec::new(length, true, true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootReplicates {
    pub stats: Vec<f64>,
    /// Set when the scheme ran with a diagnostic override.
    pub warning: Option<String>,
}

impl BootReplicates {
    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    pub fn mean(&self) -> f64 {
        crate::stats::mean(&self.stats)
    }

    /// Variance with divisor `B`, computed on data shifted by the first
    /// replicate so identical replicates give exactly zero.
    pub fn variance(&self) -> f64 {
        let s0 = self.stats[0];
        let b = self.stats.len() as f64;
        let m = self.stats.iter().map(|s| s - s0).sum::<f64>() / b;
        self.stats.iter().map(|s| (s - s0 - m) * (s - s0 - m)).sum::<f64>() / b
    }

    pub fn quantile(&self, p: f64) -> f64 {
        crate::stats::quantile(&self.stats, p)
    }
}

fn check_b(b: usize) -> Result<()> {
    if b == 0 {
        return Err(Error::spec("number of bootstrap replicates must be >= 1"));
    }
    Ok(())
}

fn run<F>(b: usize, rng: RngSpec, make: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    (0..b)
        .into_par_iter()
        .map(|i| {
            let v = make(&mut rng.offset(i as u64).rng())?;
            if !v.is_finite() {
                return Err(Error::Degenerate(format!("replicate {i} produced a non-finite statistic")));
            }
            Ok(v)
        })
        .collect()
}

/// One block-bootstrap resample of `x` (`ceil(n/l)` blocks, truncated to `n`).
pub fn block_resample<R: Rng>(x: &[f64], spec: &BlockSpec, rng: &mut R) -> Vec<f64> {
    let n = x.len();
    let l = spec.length;
    let k = n.div_ceil(l);
    let mut out = Vec::with_capacity(k * l);
    for _ in 0..k {
        let start = match (spec.overlap, spec.circular) {
            (true, true) => rng.random_range(0..n),
            (true, false) => rng.random_range(0..=n - l),
            (false, true) => l * rng.random_range(0..k),
            (false, false) => l * rng.random_range(0..n / l),
        };
        out.extend((start..start + l).map(|i| x[i % n]));
    }
    out.truncate(n);
    out
}

/// Moving/non-overlapping block bootstrap of `stat`.
pub fn block_bootstrap<F>(ts: &TimeSeries, spec: &BlockSpec, stat: F, b: usize, rng: RngSpec) -> Result<BootReplicates>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_b(b)?;
    if spec.length == 0 || spec.length > ts.len() {
        return Err(Error::spec(format!("block length {} outside 1..={}", spec.length, ts.len())));
    }
    let x = ts.values();
    let stats = run(b, rng, |r| Ok(stat(&block_resample(x, spec, r))))?;
    Ok(BootReplicates { stats, warning: None })
}

/// Circular resample with geometric block lengths of mean `mean_block`.
pub fn stationary_resample<R: Rng>(x: &[f64], mean_block: f64, rng: &mut R) -> Vec<f64> {
    let n = x.len();
    let p = 1.0 / mean_block;
    let mut out = Vec::with_capacity(n);
    let mut i = rng.random_range(0..n);
    for _ in 0..n {
        out.push(x[i]);
        i = if rng.random::<f64>() < p { rng.random_range(0..n) } else { (i + 1) % n };
    }
    out
}

/// Stationary bootstrap of `stat`.
pub fn stationary_bootstrap<F>(ts: &TimeSeries, mean_block: f64, stat: F, b: usize, rng: RngSpec) -> Result<BootReplicates>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_b(b)?;
    if !(mean_block >= 1.0) {
        return Err(Error::spec(format!("mean block length {mean_block} must be >= 1")));
    }
    let x = ts.values();
    let stats = run(b, rng, |r| Ok(stat(&stationary_resample(x, mean_block, r))))?;
    Ok(BootReplicates { stats, warning: None })
}

/// Spectral radius of the companion matrix of `x_t = sum_j a_j x_{t-j}`.
pub fn companion_spectral_radius(a: &[f64]) -> f64 {
    let p = a.len();
    if p == 0 {
        return 0.0;
    }
    let c = nalgebra::DMatrix::from_fn(p, p, |i, j| if i == 0 { a[j] } else { (i == j + 1) as u8 as f64 });
    c.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Fitted AR sieve: demeaned series, coefficients and centered residuals.
#[derive(Debug, Clone)]
pub struct SieveFit {
    pub mean: f64,
    pub coeffs: Vec<f64>,
    pub residuals: Vec<f64>,
    pub spectral_radius: f64,
}

pub fn fit_sieve(ts: &TimeSeries, p: usize) -> Result<SieveFit> {
    let n = ts.len();
    if 2 * p >= n {
        return Err(Error::spec(format!("sieve order {p} must be below n/2 = {}", n / 2)));
    }
    let mean = ts.mean();
    let dm = ts.shifted(-mean);
    let (coeffs, mut residuals) = if p == 0 {
        (Vec::new(), dm.into_vec())
    } else {
        let fit = ols_ar(&dm, p, Deterministic::None)?;
        (fit.coeffs.iter().copied().collect(), fit.residuals.into_vec())
    };
    let rm = crate::stats::mean(&residuals);
    residuals.iter_mut().for_each(|r| *r -= rm);
    let spectral_radius = companion_spectral_radius(&coeffs);
    Ok(SieveFit { mean, coeffs, residuals, spectral_radius })
}

impl SieveFit {
    /// Regenerate a series of length `n` with a burn-in of `100 + p`.
    pub fn generate<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let p = self.coeffs.len();
        let burn = 100 + p;
        let m = self.residuals.len();
        let mut z = vec![0.0; burn + n + p];
        for t in p..z.len() {
            let ar: f64 = self.coeffs.iter().enumerate().map(|(j, a)| a * z[t - 1 - j]).sum();
            z[t] = ar + self.residuals[rng.random_range(0..m)];
        }
        z[burn + p..].iter().map(|v| v + self.mean).collect()
    }
}

/// AR(`p`) sieve bootstrap of `stat`. An explosive or unit-root fit is an
/// error unless `allow_unstable` is set, in which case the replicates carry
/// a warning.
pub fn sieve_bootstrap<F>(
    ts: &TimeSeries,
    p: usize,
    stat: F,
    b: usize,
    rng: RngSpec,
    allow_unstable: bool,
) -> Result<BootReplicates>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_b(b)?;
    let fit = fit_sieve(ts, p)?;
    let mut warning = None;
    if fit.spectral_radius >= 1.0 {
        if !allow_unstable {
            return Err(Error::Unstable(fit.spectral_radius));
        }
        warning = Some(format!("fitted AR has companion spectral radius {}", fit.spectral_radius));
    }
    let n = ts.len();
    let stats = run(b, rng, |r| Ok(stat(&fit.generate(n, r))))?;
    Ok(BootReplicates { stats, warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplier {
    Gaussian,
    Rademacher,
}

impl std::str::FromStr for Multiplier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Multiplier::Gaussian),
            "rademacher" => Ok(Multiplier::Rademacher),
            other => Err(Error::Parse(format!("unknown multiplier `{other}`"))),
        }
    }
}

/// `y*_t = e_t eta_t` with iid multipliers `eta_t`.
pub fn wild_resample<R: Rng>(residuals: &[f64], multiplier: Multiplier, rng: &mut R) -> Vec<f64> {
    residuals
        .iter()
        .map(|e| {
            let eta: f64 = match multiplier {
                Multiplier::Gaussian => StandardNormal.sample(rng),
                Multiplier::Rademacher => if rng.random::<bool>() { 1.0 } else { -1.0 },
            };
            e * eta
        })
        .collect()
}

pub fn wild_bootstrap<F>(residuals: &TimeSeries, multiplier: Multiplier, stat: F, b: usize, rng: RngSpec) -> Result<BootReplicates>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_b(b)?;
    let e = residuals.values();
    let stats = run(b, rng, |r| Ok(stat(&wild_resample(e, multiplier, r))))?;
    Ok(BootReplicates { stats, warning: None })
}

/// Residual-based block bootstrap of `T(rho* - 1)` under an imposed unit
/// root: residuals of `x_t = rho x_{t-1} + u_t` are centered, block
/// resampled, and cumulated from `x_1`; `T = n - 1`.
pub fn residual_unitroot_bootstrap(ts: &TimeSeries, block: &BlockSpec, b: usize, rng: RngSpec) -> Result<BootReplicates> {
    check_b(b)?;
    let n = ts.len();
    if n < 20 {
        return Err(Error::Size("unit-root bootstrap needs n >= 20".into()));
    }
    let x = ts.values();
    let reg = Ar1Regression::fit(x, Deterministic::None)?;
    let scale = x.iter().map(|v| v * v).sum::<f64>().max(1.0);
    if reg.ssr <= 1e-26 * scale {
        return Err(Error::Degenerate("autoregression residuals are identically zero".into()));
    }
    if block.length > reg.resid.len() {
        return Err(Error::spec(format!("block length {} exceeds {} residuals", block.length, reg.resid.len())));
    }
    let um = crate::stats::mean(&reg.resid);
    let u: Vec<f64> = reg.resid.iter().map(|v| v - um).collect();
    let stats = run(b, rng, |r| {
        let us = block_resample(&u, block, r);
        let mut level = x[0];
        let mut xs = Vec::with_capacity(n);
        xs.push(level);
        for e in us {
            level += e;
            xs.push(level);
        }
        Ok(Ar1Regression::fit(&xs, Deterministic::None)?.coef_stat())
    })?;
    Ok(BootReplicates { stats, warning: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Left,
    Right,
    /// Compares absolute values, for statistics centered at zero.
    Two,
}

impl std::str::FromStr for Tail {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Tail::Left),
            "right" => Ok(Tail::Right),
            "two" => Ok(Tail::Two),
            other => Err(Error::Parse(format!("unknown tail `{other}`"))),
        }
    }
}

/// `(1 + #{replicates at least as extreme as stat}) / (B + 1)`.
pub fn bootstrap_pvalue(stat: f64, reps: &BootReplicates, tail: Tail) -> Result<f64> {
    if reps.is_empty() {
        return Err(Error::spec("no bootstrap replicates"));
    }
    let count = reps
        .stats
        .iter()
        .filter(|r| match tail {
            Tail::Left => **r <= stat,
            Tail::Right => **r >= stat,
            Tail::Two => r.abs() >= stat.abs(),
        })
        .count();
    Ok((1 + count) as f64 / (reps.len() + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v).unwrap()
    }

    fn mean(x: &[f64]) -> f64 {
        crate::stats::mean(x)
    }

    #[test]
    fn full_length_block_reproduces_series() {
        let x = ts((0..17).map(|t| (t as f64).sqrt()).collect());
        let spec = BlockSpec::new(17, false, false).unwrap();
        let r = block_bootstrap(&x, &spec, mean, 50, RngSpec::new(1, 0)).unwrap();
        assert_eq!(r.variance(), 0.0);
        assert!(r.stats.iter().all(|s| *s == x.mean()));
    }

    #[test]
    fn invalid_specs() {
        let x = ts(vec![1.0, 2.0, 3.0]);
        let spec = BlockSpec::circular(2).unwrap();
        assert!(block_bootstrap(&x, &spec, mean, 0, RngSpec::default()).is_err());
        assert!(block_bootstrap(&x, &BlockSpec::circular(4).unwrap(), mean, 5, RngSpec::default()).is_err());
        assert!(BlockSpec::new(0, true, true).is_err());
        assert!(stationary_bootstrap(&x, 0.5, mean, 5, RngSpec::default()).is_err());
        assert!(fit_sieve(&ts(vec![1.0, 2.0, 0.5, 3.0]), 2).is_err());
    }

    #[test]
    fn resample_lengths() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let mut r = RngSpec::new(3, 0).rng();
        for spec in [
            BlockSpec::new(3, true, true).unwrap(),
            BlockSpec::new(3, true, false).unwrap(),
            BlockSpec::new(3, false, true).unwrap(),
            BlockSpec::new(3, false, false).unwrap(),
        ] {
            assert_eq!(block_resample(&x, &spec, &mut r).len(), 10);
        }
        assert_eq!(stationary_resample(&x, 4.0, &mut r).len(), 10);
    }

    #[test]
    fn long_stationary_blocks_rotate() {
        let x: Vec<f64> = (0..25).map(|t| (t as f64 * 0.9).sin()).collect();
        let r = stationary_bootstrap(&ts(x.clone()), 1e9, mean, 20, RngSpec::new(8, 0)).unwrap();
        for s in &r.stats {
            assert!((s - mean(&x)).abs() < 1e-14);
        }
    }

    #[test]
    fn pvalue_extremes() {
        let reps = BootReplicates { stats: vec![1.0, 2.0, 3.0, 4.0], warning: None };
        assert_eq!(bootstrap_pvalue(0.0, &reps, Tail::Right).unwrap(), 1.0);
        assert_eq!(bootstrap_pvalue(5.0, &reps, Tail::Right).unwrap(), 0.2);
        assert_eq!(bootstrap_pvalue(0.0, &reps, Tail::Left).unwrap(), 0.2);
    }

    #[test]
    fn spectral_radius_of_ar2() {
        // roots of z^2 - 0.5 z - 0.3: (0.5 +- sqrt(1.45)) / 2
        let expect = (0.5 + 1.45f64.sqrt()) / 2.0;
        assert!((companion_spectral_radius(&[0.5, 0.3]) - expect).abs() < 1e-12);
        assert!(companion_spectral_radius(&[1.2]) > 1.0);
    }

    #[test]
    fn unstable_sieve_needs_override() {
        let x = ts((0..60).map(|t| 1.1f64.powi(t)).collect());
        let err = sieve_bootstrap(&x, 1, mean, 5, RngSpec::default(), false).unwrap_err();
        assert!(matches!(err, Error::Unstable(_)));
        let ok = sieve_bootstrap(&x, 1, mean, 5, RngSpec::default(), true).unwrap();
        assert!(ok.warning.is_some());
    }

    #[test]
    fn constant_series_is_degenerate() {
        let x = ts(vec![3.0; 40]);
        let err = residual_unitroot_bootstrap(&x, &BlockSpec::circular(4).unwrap(), 10, RngSpec::default()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_) | Error::Rank(_)), "{err:?}");
    }
}
