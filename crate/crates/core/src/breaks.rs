//! Parameter-instability tests for predictive regressions
//! `y_t = mu + beta' x_{t-1} + u_t`: split-sample and sup-Wald statistics,
//! simulated normalized-Brownian-bridge critical values, Nyblom-type LM
//! statistics, and a moving-window monitoring statistic.
//!
//! Break index `k` counts regression observations in the first regime;
//! the regression sample is `t = 2..n`, so `T = n - 1`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{inv_spd, sqrt_psd, Ols};
use crate::mc::QuantileTable;
use crate::series::{normals, MultiSeries, RngSpec, TimeSeries};

fn lagged_sample(y: &TimeSeries, x: &MultiSeries) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = y.len();
    if x.nrows() != n {
        return Err(Error::Size(format!("y has {n} rows, x has {}", x.nrows())));
    }
    if n < 3 {
        return Err(Error::Size("need n >= 3".into()));
    }
    Ok((DVector::from_column_slice(&y.values()[1..]), x.matrix().rows(0, n - 1).into_owned()))
}

fn check_regimes(k: usize, t_obs: usize, d: usize) -> Result<()> {
    if k < d + 2 || t_obs < k + d + 2 {
        return Err(Error::Size(format!(
            "break at {k} leaves a regime shorter than {} observations (T = {t_obs})",
            d + 2
        )));
    }
    Ok(())
}

fn center(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
}

fn wald_from_fit(fit: &Ols, d: usize, sigma2: f64) -> Result<f64> {
    let diff = fit.coef.rows(0, d) - fit.coef.rows(d, d);
    let v = fit.xtx_inv.view((0, 0), (d, d)) + fit.xtx_inv.view((d, d), (d, d))
        - fit.xtx_inv.view((0, d), (d, d))
        - fit.xtx_inv.view((d, 0), (d, d));
    let v = (&v + v.transpose()) * 0.5;
    let vi = inv_spd(&v, "regime contrast covariance")?;
    Ok((diff.transpose() * vi * &diff)[(0, 0)] / sigma2)
}

/// Wald statistic for equal slopes before and after observation `k`,
/// built from the regime blocks `x_{t-1} 1{t <= k}` and
/// `x_{t-1} 1{t > k}`. With `demean`, `y` and both blocks are demeaned
/// over the full sample. `sigma2` is the pooled two-regime residual
/// variance.
pub fn split_wald(y: &TimeSeries, x: &MultiSeries, k: usize, demean: bool) -> Result<f64> {
    let (mut yv, xl) = lagged_sample(y, x)?;
    let (t_obs, d) = xl.shape();
    check_regimes(k, t_obs, d)?;
    let mut xs = DMatrix::from_fn(t_obs, 2 * d, |t, c| {
        let (block, j) = (c / d, c % d);
        if (t < k) == (block == 0) { xl[(t, j)] } else { 0.0 }
    });
    if demean {
        center(&mut xs);
        let m = yv.mean();
        yv.add_scalar_mut(-m);
    }
    let fit = Ols::fit(&xs, &yv)?;
    let sigma2 = fit.ssr / (t_obs - 2 * d - demean as usize) as f64;
    if !(sigma2 > 0.0) {
        return Ok(0.0);
    }
    wald_from_fit(&fit, d, sigma2)
}

/// Split-sample Wald statistic with a separate intercept in each regime,
/// the direct alternative to global demeaning.
pub fn split_wald_separate_intercepts(y: &TimeSeries, x: &MultiSeries, k: usize) -> Result<f64> {
    let (yv, xl) = lagged_sample(y, x)?;
    let (t_obs, d) = xl.shape();
    check_regimes(k, t_obs, d)?;
    let xs = DMatrix::from_fn(t_obs, 2 * d + 2, |t, c| {
        let first = t < k;
        match c {
            c if c < 2 * d => {
                let (block, j) = (c / d, c % d);
                if first == (block == 0) { xl[(t, j)] } else { 0.0 }
            }
            c if c == 2 * d => first as u8 as f64,
            _ => (!first) as u8 as f64,
        }
    });
    let fit = Ols::fit(&xs, &yv)?;
    let sigma2 = fit.ssr / (t_obs - 2 * d - 2) as f64;
    if !(sigma2 > 0.0) {
        return Ok(0.0);
    }
    wald_from_fit(&fit, d, sigma2)
}

#[derive(Debug, Clone)]
pub struct BreakScan {
    pub fractions: Vec<f64>,
    pub breaks: Vec<usize>,
    pub wald_path: Vec<f64>,
    pub sup_stat: f64,
    pub argmax_pi: f64,
    pub argmax_k: usize,
    pub critical_values: Option<QuantileTable>,
}

impl BreakScan {
    /// Attach simulated normalized-Brownian-bridge quantiles for the same
    /// trim and dimension.
    pub fn with_critical_values(mut self, d: usize, trim: (f64, f64), reps: usize, rng: RngSpec) -> Result<Self> {
        self.critical_values = Some(nbb_sup_mc(d, trim, 1000, reps, rng)?);
        Ok(self)
    }
}

fn check_trim(trim: (f64, f64)) -> Result<()> {
    let (a, b) = trim;
    if !(0.0 < a && a <= b && b < 1.0) {
        return Err(Error::Domain(format!("trim ({a}, {b}) must satisfy 0 < a <= b < 1")));
    }
    Ok(())
}

/// Scan [`split_wald`] over every admissible `k` in
/// `[floor(T pi1), floor(T pi2)]` using cumulative moments.
pub fn sup_wald(y: &TimeSeries, x: &MultiSeries, trim: (f64, f64), demean: bool) -> Result<BreakScan> {
    check_trim(trim)?;
    let (yv, xl) = lagged_sample(y, x)?;
    let (t_obs, d) = xl.shape();
    let tf = t_obs as f64;
    let lo = ((tf * trim.0).floor() as usize).max(d + 2);
    let hi = ((tf * trim.1).floor() as usize).min(t_obs.saturating_sub(d + 2));
    if lo > hi {
        return Err(Error::Size(format!("no admissible break in trim range for T = {t_obs}")));
    }
    let dm = demean as usize;
    let ybar = if demean { yv.mean() } else { 0.0 };
    let a_tot = xl.tr_mul(&xl);
    let s_tot = xl.row_sum().transpose();
    let xy_tot = xl.tr_mul(&yv);
    let yy = yv.iter().map(|v| (v - ybar) * (v - ybar)).sum::<f64>();

    let mut a1 = DMatrix::<f64>::zeros(d, d);
    let mut s1 = DVector::<f64>::zeros(d);
    let mut xy1 = DVector::<f64>::zeros(d);
    let mut breaks = Vec::new();
    let mut path = Vec::new();
    for t in 0..hi {
        let xt = xl.row(t).transpose();
        a1 += &xt * xt.transpose();
        s1 += &xt;
        xy1 += &xt * yv[t];
        let k = t + 1;
        if k < lo {
            continue;
        }
        let a2 = &a_tot - &a1;
        let s2 = &s_tot - &s1;
        let xy2 = &xy_tot - &xy1;
        let mut g = DMatrix::<f64>::zeros(2 * d, 2 * d);
        g.view_mut((0, 0), (d, d)).copy_from(&a1);
        g.view_mut((d, d), (d, d)).copy_from(&a2);
        let mut c = DVector::<f64>::zeros(2 * d);
        c.rows_mut(0, d).copy_from(&xy1);
        c.rows_mut(d, d).copy_from(&xy2);
        if demean {
            let mut s = DVector::<f64>::zeros(2 * d);
            s.rows_mut(0, d).copy_from(&s1);
            s.rows_mut(d, d).copy_from(&s2);
            g -= &s * s.transpose() / tf;
            c -= &s * ybar;
        }
        let gi = inv_spd(&g, "split design Gram matrix")?;
        let b = &gi * &c;
        let ssr = (yy - b.dot(&c)).max(0.0);
        let sigma2 = ssr / (t_obs - 2 * d - dm) as f64;
        let diff = b.rows(0, d) - b.rows(d, d);
        let v = gi.view((0, 0), (d, d)) + gi.view((d, d), (d, d)) - gi.view((0, d), (d, d)) - gi.view((d, 0), (d, d));
        let v = (&v + v.transpose()) * 0.5;
        let w = if sigma2 > 0.0 {
            (diff.transpose() * inv_spd(&v, "regime contrast covariance")? * &diff)[(0, 0)] / sigma2
        } else {
            0.0
        };
        breaks.push(k);
        path.push(w);
    }
    let (imax, sup_stat) = path
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, w)| if w > acc.1 { (i, w) } else { acc });
    Ok(BreakScan {
        fractions: breaks.iter().map(|k| *k as f64 / tf).collect(),
        argmax_pi: breaks[imax] as f64 / tf,
        argmax_k: breaks[imax],
        breaks,
        wald_path: path,
        sup_stat,
        critical_values: None,
    })
}

/// Draws of `sup_pi BB(pi)' BB(pi) / (pi (1 - pi))` for a `p`-dimensional
/// Brownian bridge on `grid` equal steps, over grid points in `trim`.
pub fn nbb_sup_draws(p: usize, trim: (f64, f64), grid: usize, reps: usize, rng: RngSpec) -> Result<Vec<f64>> {
    check_trim(trim)?;
    if p == 0 || grid < 2 {
        return Err(Error::spec("need p >= 1 and grid >= 2"));
    }
    let g = grid as f64;
    let (lo, hi) = if trim.0 == trim.1 {
        let i = (trim.0 * g).round() as usize;
        (i, i)
    } else {
        ((trim.0 * g - 1e-9).ceil() as usize, (trim.1 * g + 1e-9).floor() as usize)
    };
    if lo == 0 || hi >= grid || lo > hi {
        return Err(Error::Size(format!("grid of {grid} points has no interior point in the trim range")));
    }
    let sd = 1.0 / g.sqrt();
    Ok((0..reps)
        .into_par_iter()
        .map(|r| {
            let z = normals(&mut rng.offset(r as u64).rng(), grid * p);
            // Brownian paths W_j(i / grid), stored row-major by grid point
            let mut w = vec![0.0; (grid + 1) * p];
            for i in 1..=grid {
                for j in 0..p {
                    w[i * p + j] = w[(i - 1) * p + j] + sd * z[(i - 1) * p + j];
                }
            }
            let end = &w[grid * p..];
            (lo..=hi)
                .map(|i| {
                    let pi = i as f64 / g;
                    let q: f64 = (0..p).map(|j| (w[i * p + j] - pi * end[j]).powi(2)).sum();
                    q / (pi * (1.0 - pi))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

/// Quantile table of the normalized-Brownian-bridge supremum.
pub fn nbb_sup_mc(p: usize, trim: (f64, f64), grid: usize, reps: usize, rng: RngSpec) -> Result<QuantileTable> {
    if reps < 100 {
        return Err(Error::Size("nbb_sup_mc needs reps >= 100".into()));
    }
    let draws = nbb_sup_draws(p, trim, grid, reps, rng)?;
    Ok(QuantileTable::from_sample(&draws, &QuantileTable::DEFAULT_PROBS, rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmStats {
    /// Joint statistic for the intercept and slopes.
    pub lm: f64,
    /// Intercept only.
    pub lm1: f64,
    /// Slopes only.
    pub lm2: f64,
}

/// Nyblom-type LM statistics from the fitted regression
/// `y_t = a + b' x_{t-1} + b0' dx_t + e_t`:
///
/// ```text
/// LM  = (T s2)^-1 sum_j S_j' (sum X X')^-1 S_j,   X_t = (1, x_{t-1}')'
/// LM1 = (T^2 s2)^-1 sum_j (sum_{t<=j} e_t)^2
/// LM2 = (T s2)^-1 sum_j S_xj' (sum x_{t-1} x_{t-1}')^-1 S_xj
/// ```
///
/// with `S_j = sum_{t<=j} X_t e_t`, `S_xj` its slope block and
/// `s2 = T^-1 sum e_t^2`.
pub fn lm_nyblom(y: &TimeSeries, x: &MultiSeries) -> Result<LmStats> {
    let n = y.len();
    let d = x.ncols();
    if x.nrows() != n || n < d + 3 {
        return Err(Error::Size(format!("need matching lengths and n >= d + 3 = {}", d + 3)));
    }
    let xm = x.matrix();
    let t_obs = n - 1;
    let reg = DMatrix::from_fn(t_obs, 1 + 2 * d, |t, c| match c {
        0 => 1.0,
        c if c <= d => xm[(t, c - 1)],
        c => xm[(t + 1, c - 1 - d)] - xm[(t, c - 1 - d)],
    });
    let yv = DVector::from_column_slice(&y.values()[1..]);
    let fit = Ols::fit(&reg, &yv)?;
    let tf = t_obs as f64;
    let s2 = fit.ssr / tf;
    let scale = yv.norm_squared().max(1.0);
    if fit.ssr <= 1e-28 * scale {
        return Ok(LmStats { lm: 0.0, lm1: 0.0, lm2: 0.0 });
    }
    let xs = reg.columns(0, 1 + d).into_owned();
    let full_inv = inv_spd(&xs.tr_mul(&xs), "score Gram matrix")?;
    let xx = xs.columns(1, d).into_owned();
    let slope_inv = inv_spd(&xx.tr_mul(&xx), "regressor Gram matrix")?;
    let mut s = DVector::<f64>::zeros(1 + d);
    let (mut lm, mut lm1, mut lm2) = (0.0, 0.0, 0.0);
    for t in 0..t_obs {
        s += xs.row(t).transpose() * fit.resid[t];
        lm += (s.transpose() * &full_inv * &s)[(0, 0)];
        lm1 += s[0] * s[0];
        let sx = s.rows(1, d);
        lm2 += (sx.transpose() * &slope_inv * sx)[(0, 0)];
    }
    Ok(LmStats { lm: lm / (tf * s2), lm1: lm1 / (tf * tf * s2), lm2: lm2 / (tf * s2) })
}

#[derive(Debug, Clone)]
pub struct MeMonitor {
    /// `(k, statistic)` for each monitoring start `k`.
    pub path: Vec<(usize, f64)>,
    pub max_stat: f64,
    pub argmax_k: usize,
    pub window: usize,
}

/// Moving-estimates monitoring of `y_t = x_t' beta + u_t`:
///
/// ```text
/// ME_k = w / (s_T sqrt(T)) || Q_T^{1/2} (b(k, w) - b_T) ||
/// ```
///
/// where `T = n_hist`, `b_T`, `s_T^2 = SSR/(T - d)` and
/// `Q_T = T^-1 sum x_t x_t'` come from the historical sample, `w = floor(T h)`,
/// and `b(k, w)` is OLS over observations `k+1..k+w` for
/// `k = n_hist..n-w`. Include a column of ones in `x` for an intercept.
pub fn me_monitor(y: &TimeSeries, x: &MultiSeries, h: f64, n_hist: usize) -> Result<MeMonitor> {
    let n = y.len();
    let d = x.ncols();
    if x.nrows() != n {
        return Err(Error::Size(format!("y has {n} rows, x has {}", x.nrows())));
    }
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Domain(format!("window fraction {h} outside (0, 1]")));
    }
    if n_hist <= d || n_hist >= n {
        return Err(Error::Size(format!("historical sample {n_hist} must lie in ({d}, {n})")));
    }
    let w = (n_hist as f64 * h).floor() as usize;
    if w < d + 2 {
        return Err(Error::Size(format!("window {w} shorter than d + 2 = {}", d + 2)));
    }
    if n_hist + w > n {
        return Err(Error::Size(format!("no monitoring window fits after {n_hist} of {n} observations")));
    }
    let xm = x.matrix();
    let yv = DVector::from_column_slice(y.values());
    let hist = Ols::fit(&xm.rows(0, n_hist).into_owned(), &yv.rows(0, n_hist).into_owned())?;
    let tf = n_hist as f64;
    let q = xm.rows(0, n_hist).tr_mul(&xm.rows(0, n_hist)) / tf;
    let q_half = sqrt_psd(&q);
    // an exact historical fit leaves nothing to standardize by
    let exact = hist.ssr <= 1e-24 * yv.rows(0, n_hist).norm_squared().max(1.0);
    let s_t = if exact { 0.0 } else { hist.s2().sqrt() };
    let ks: Vec<usize> = (n_hist..=n - w).collect();
    let path: Vec<(usize, f64)> = ks
        .par_iter()
        .map(|&k| {
            let xw = xm.rows(k, w);
            let yw = yv.rows(k, w);
            let g = xw.tr_mul(&xw);
            let b = inv_spd(&g, "window Gram matrix")? * xw.tr_mul(&yw);
            let gap = &q_half * (b - &hist.coef);
            let stat = if s_t > 0.0 { w as f64 / (s_t * tf.sqrt()) * gap.norm() } else { 0.0 };
            Ok((k, stat))
        })
        .collect::<Result<_>>()?;
    let (argmax_k, max_stat) = path
        .iter()
        .copied()
        .fold((n_hist, f64::NEG_INFINITY), |acc, (k, s)| if s > acc.1 { (k, s) } else { acc });
    Ok(MeMonitor { path, max_stat, argmax_k, window: w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(n: usize, seed: u64) -> (TimeSeries, MultiSeries) {
        let mut r = RngSpec::new(seed, 0).rng();
        let e = normals(&mut r, 2 * n);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..n)
            .map(|t| {
                x = 0.9 * x + e[t];
                x
            })
            .collect();
        let y: Vec<f64> = (0..n).map(|t| 1.0 + if t > 0 { 0.3 * xs[t - 1] } else { 0.0 } + e[n + t]).collect();
        (TimeSeries::new(y).unwrap(), MultiSeries::new(DMatrix::from_column_slice(n, 1, &xs)).unwrap())
    }

    #[test]
    fn scanner_matches_direct_regression() {
        let (y, x) = sample(120, 3);
        for demean in [false, true] {
            let scan = sup_wald(&y, &x, (0.15, 0.85), demean).unwrap();
            for (k, w) in scan.breaks.iter().zip(&scan.wald_path) {
                assert_relative_eq!(*w, split_wald(&y, &x, *k, demean).unwrap(), max_relative = 1e-7);
            }
            assert_eq!(scan.sup_stat, scan.wald_path.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
    }

    #[test]
    fn short_regime_is_size_error() {
        let (y, x) = sample(40, 1);
        assert!(matches!(split_wald(&y, &x, 2, true), Err(Error::Size(_))));
        assert!(matches!(split_wald(&y, &x, 37, true), Err(Error::Size(_))));
    }

    #[test]
    fn identical_regimes_give_zero() {
        let xs: Vec<f64> = (0..41).map(|t| ((t % 20) as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = (0..41).map(|t| if t > 0 { 2.0 * xs[t - 1] } else { 0.0 }).collect();
        let y = TimeSeries::new(y).unwrap();
        let x = MultiSeries::new(DMatrix::from_column_slice(41, 1, &xs)).unwrap();
        assert_eq!(split_wald(&y, &x, 20, false).unwrap(), 0.0);
    }

    #[test]
    fn lm_zero_residuals() {
        let xs: Vec<f64> = (0..30).map(|t| (t as f64 * 0.4).sin() * 3.0).collect();
        let y: Vec<f64> = (0..30).map(|t| 1.0 + if t > 0 { 0.5 * xs[t - 1] } else { 0.0 } + 0.1 * if t > 0 { xs[t] - xs[t - 1] } else { 0.0 }).collect();
        let r = lm_nyblom(&TimeSeries::new(y).unwrap(), &MultiSeries::new(DMatrix::from_column_slice(30, 1, &xs)).unwrap()).unwrap();
        assert_eq!(r, LmStats { lm: 0.0, lm1: 0.0, lm2: 0.0 });
    }

    #[test]
    fn pointwise_nbb_is_chi_square() {
        let draws = nbb_sup_draws(2, (0.5, 0.5), 200, 4000, RngSpec::new(5, 0)).unwrap();
        let m = crate::stats::mean(&draws);
        assert!((m - 2.0).abs() < 0.15, "{m}");
    }

    #[test]
    fn me_without_noise_is_flat() {
        let n = 200;
        let xm = DMatrix::from_fn(n, 2, |t, c| if c == 0 { 1.0 } else { (t as f64 * 0.13).cos() });
        let y: Vec<f64> = (0..n).map(|t| 0.5 + 2.0 * xm[(t, 1)]).collect();
        let y = TimeSeries::new(y).unwrap();
        let x = MultiSeries::new(xm).unwrap();
        let r = me_monitor(&y, &x, 0.25, 100).unwrap();
        assert!(r.path.iter().all(|(_, s)| *s == 0.0));
        assert!(matches!(me_monitor(&y, &x, 0.02, 100), Err(Error::Size(_))));
    }
}
