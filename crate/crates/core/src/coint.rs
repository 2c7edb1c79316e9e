//! Cointegrating regressions: fully modified OLS, the Shin residual
//! cointegration statistic, and the F_k / sup-F break test.
//!
//! All regressions use the sample `t = 2..n` so that `dx_t` is defined for
//! every observation; `T = n - 1` below.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{checked_cholesky, inv_spd, Ols};
use crate::lrv::{hac_lrv, hac_lrv_scalar, KernelSpec, LrvEstimate};
use crate::series::{normals, MultiSeries, RngSpec, TimeSeries};

#[derive(Debug, Clone)]
pub struct FmolsResult {
    /// Intercept followed by the slopes.
    pub beta_plus: DVector<f64>,
    pub beta_ols: DVector<f64>,
    /// `Omega_{e.eta} (sum z z')^{-1}`.
    pub cov: DMatrix<f64>,
    pub residuals_plus: TimeSeries,
    /// Long-run pieces of `(e_t, dx_t - mean dx)`.
    pub lrv: LrvEstimate,
    /// Conditional long-run variance `Omega_ee - Omega_e.eta Omega_etaeta^-1 Omega_eta.e`.
    pub omega_e_given_eta: f64,
    /// Serial-correlation correction `Delta+_{eta e}`.
    pub delta_plus: DVector<f64>,
    pub nobs: usize,
}

impl FmolsResult {
    pub fn se(&self, i: usize) -> f64 {
        self.cov[(i, i)].sqrt()
    }

    /// t-ratio of coefficient `i` (0 = intercept) against `value`.
    pub fn t_ratio(&self, i: usize, value: f64) -> f64 {
        (self.beta_plus[i] - value) / self.se(i)
    }
}

/// Shared FM-OLS intermediates, also consumed by the break test.
struct FmFit {
    z: DMatrix<f64>,
    res: FmolsResult,
}

fn check_inputs(y: &TimeSeries, x: &MultiSeries) -> Result<()> {
    let (n, d) = (y.len(), x.ncols());
    if x.nrows() != n {
        return Err(Error::Size(format!("y has {n} rows, x has {}", x.nrows())));
    }
    if n < d + 3 {
        return Err(Error::Size(format!("need n >= d + 3 = {}, got {n}", d + 3)));
    }
    Ok(())
}

fn design(x: &MultiSeries, from: usize) -> DMatrix<f64> {
    let m = x.matrix();
    let rows = m.nrows() - from;
    DMatrix::from_fn(rows, 1 + m.ncols(), |r, c| if c == 0 { 1.0 } else { m[(r + from, c - 1)] })
}

fn fm_fit(y: &TimeSeries, x: &MultiSeries, kernel: &KernelSpec) -> Result<FmFit> {
    check_inputs(y, x)?;
    kernel.validate()?;
    let (n, d) = (y.len(), x.ncols());
    let t_obs = n - 1;
    let z = design(x, 1);
    let yv = DVector::from_iterator(t_obs, y.values()[1..].iter().copied());
    let ols = Ols::fit(&z, &yv)?;

    let xm = x.matrix();
    let mut dx = DMatrix::from_fn(t_obs, d, |r, c| xm[(r + 1, c)] - xm[(r, c)]);
    for mut col in dx.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    let mut u = DMatrix::zeros(t_obs, 1 + d);
    u.set_column(0, &ols.resid);
    u.view_mut((0, 1), (t_obs, d)).copy_from(&dx);
    let lrv = hac_lrv(&MultiSeries::new(u)?, kernel, false)?;

    let om = &lrv.omega;
    let o_ee = om[(0, 0)];
    let o_ex = om.view((0, 1), (1, d)).into_owned();
    let o_xx = om.view((1, 1), (d, d)).into_owned();
    let o_xx_inv = inv_spd(&o_xx, "long-run variance of dx")?;
    // one-sided sum including the contemporaneous term
    let delta = lrv.one_sided();
    let d_xe = delta.view((1, 0), (d, 1)).into_owned();
    let d_xx = delta.view((1, 1), (d, d)).into_owned();
    let a = &o_ex * &o_xx_inv;
    let delta_plus = &d_xe - &d_xx * a.transpose();
    let omega_e_given_eta = o_ee - (&a * o_ex.transpose())[(0, 0)];

    let y_plus = &yv - &dx * a.transpose();
    let mut rhs = z.tr_mul(&y_plus);
    for i in 0..d {
        rhs[i + 1] -= t_obs as f64 * delta_plus[(i, 0)];
    }
    let zz_inv = inv_spd(&z.tr_mul(&z), "design Gram matrix")?;
    let beta_plus = &zz_inv * rhs;
    let resid_plus = &y_plus - &z * &beta_plus;
    let res = FmolsResult {
        cov: &zz_inv * omega_e_given_eta,
        beta_plus,
        beta_ols: ols.coef,
        residuals_plus: TimeSeries::new(resid_plus.iter().copied().collect())?,
        lrv,
        omega_e_given_eta,
        delta_plus: delta_plus.column(0).into_owned(),
        nobs: t_obs,
    };
    Ok(FmFit { z, res })
}

/// Fully modified OLS of `y_t` on `(1, x_t)` with endogeneity and
/// serial-correlation corrections computed from the kernel long-run
/// covariance of `(e_t, dx_t - mean dx)`.
pub fn fmols(y: &TimeSeries, x: &MultiSeries, kernel: &KernelSpec) -> Result<FmolsResult> {
    Ok(fm_fit(y, x, kernel)?.res)
}

/// Variance estimator in the denominator of the Shin statistic.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ShinVariance {
    /// Kernel long-run variance of the residuals.
    #[default]
    Kernel,
    /// `n^-1 sum v_t^2`.
    ShortRun,
}

/// `V_n = n^-2 sum_t S_t^2 / sigma2` for residuals `v`, with `S_t` the
/// partial sums.
pub fn shin_vn_residuals(v: &[f64], kernel: &KernelSpec, variance: ShinVariance) -> Result<f64> {
    let n = v.len() as f64;
    let sigma2 = match variance {
        ShinVariance::Kernel => hac_lrv_scalar(v, kernel, false)?,
        ShinVariance::ShortRun => v.iter().map(|e| e * e).sum::<f64>() / n,
    };
    if !(sigma2 > 0.0) {
        return Err(Error::Degenerate(format!("residual variance estimate {sigma2} is not positive")));
    }
    let mut s = 0.0;
    let mut ss = 0.0;
    for e in v {
        s += e;
        ss += s * s;
    }
    Ok(ss / (n * n * sigma2))
}

/// Shin's residual-based statistic for the null of cointegration, from
/// the OLS residuals of `y` on `(1, x)`.
pub fn shin_vn(y: &TimeSeries, x: &MultiSeries, kernel: &KernelSpec, variance: ShinVariance) -> Result<f64> {
    check_inputs(y, x)?;
    let z = design(x, 0);
    let fit = Ols::fit(&z, &DVector::from_column_slice(y.values()))?;
    let scale = y.values().iter().map(|v| v * v).sum::<f64>().max(1.0);
    if fit.ssr <= 1e-26 * scale {
        return Err(Error::Degenerate("OLS residuals are identically zero".into()));
    }
    shin_vn_residuals(fit.resid.as_slice(), kernel, variance)
}

/// Break location for [`fk_break_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakPoint {
    /// Number of regression observations in the first regime.
    Known(usize),
    /// Scan every `k` in `[floor(T pi1), floor(T pi2)]`.
    Trim(f64, f64),
}

impl Default for BreakPoint {
    fn default() -> Self {
        BreakPoint::Trim(0.15, 0.85)
    }
}

#[derive(Debug, Clone)]
pub struct FkResult {
    pub stat: f64,
    pub argmax_k: usize,
    /// Degrees of freedom of the fixed-k chi-square limit (`1 + d`).
    pub df: usize,
    pub path: Vec<(usize, f64)>,
    /// Break indices dropped because `V_k` was singular.
    pub skipped: Vec<usize>,
}

/// `F_k = S_k' [Omega_{e.eta} V_k]^{-1} S_k` with `S_k` the partial sum of
/// FM scores `z_t e+_t - [0; Delta+]` and `V_k = M_k - M_k M_T^{-1} M_k`.
/// With a trim range, reports the supremum and its location.
pub fn fk_break_test(y: &TimeSeries, x: &MultiSeries, kernel: &KernelSpec, at: BreakPoint) -> Result<FkResult> {
    let fit = fm_fit(y, x, kernel)?;
    let (z, res) = (&fit.z, &fit.res);
    let t_obs = res.nobs;
    let p = z.ncols();
    let (lo, hi) = match at {
        BreakPoint::Known(k) => {
            if k == 0 || k >= t_obs {
                return Err(Error::Domain(format!("break index {k} outside 1..{}", t_obs - 1)));
            }
            (k, k)
        }
        BreakPoint::Trim(a, b) => {
            if !(0.0 < a && a <= b && b < 1.0) {
                return Err(Error::Domain(format!("trim ({a}, {b}) must satisfy 0 < a <= b < 1")));
            }
            let lo = ((t_obs as f64 * a).floor() as usize).max(1);
            let hi = ((t_obs as f64 * b).floor() as usize).min(t_obs - 1);
            (lo, hi)
        }
    };
    if res.omega_e_given_eta <= 0.0 {
        return Err(Error::Degenerate("conditional long-run variance is not positive".into()));
    }
    let m_t = z.tr_mul(z);
    let m_t_inv = inv_spd(&m_t, "design Gram matrix")?;
    let mut s = DVector::zeros(p);
    let mut m = DMatrix::zeros(p, p);
    let mut path = Vec::new();
    let mut skipped = Vec::new();
    for t in 0..hi {
        let zt = z.row(t).transpose();
        let e = res.residuals_plus[t];
        s += &zt * e;
        for i in 1..p {
            s[i] -= res.delta_plus[i - 1];
        }
        m += &zt * zt.transpose();
        let k = t + 1;
        if k < lo {
            continue;
        }
        let v = &m - &m * &m_t_inv * &m;
        let v = (&v + v.transpose()) * (0.5 * res.omega_e_given_eta);
        match checked_cholesky(&v, "break-point moment matrix") {
            Ok(ch) => {
                let sol = ch.solve(&s);
                path.push((k, s.dot(&sol)));
            }
            Err(_) => skipped.push(k),
        }
    }
    let (argmax_k, stat) = path
        .iter()
        .copied()
        .fold((0, f64::NEG_INFINITY), |acc, (k, f)| if f > acc.1 { (k, f) } else { acc });
    if path.is_empty() {
        return Err(Error::Rank("no admissible break point".into()));
    }
    Ok(FkResult { stat, argmax_k, df: p, path, skipped })
}

/// Cointegrated system `y_t = mu + beta' x_t + u_t`, `x_t = x_{t-1} + v_t`,
/// `x_0 = 0`, with Gaussian `(u_t, v_t)` of unit variances and
/// `corr(u_t, v_{jt}) = corr` for every regressor `j` (regressor
/// innovations mutually independent).
pub fn simulate_cointegration(
    mu: f64,
    beta: &[f64],
    corr: f64,
    n: usize,
    rng: RngSpec,
) -> Result<(TimeSeries, MultiSeries)> {
    let d = beta.len();
    if d == 0 || n < 2 {
        return Err(Error::spec("need at least one regressor and n >= 2"));
    }
    if d as f64 * corr * corr >= 1.0 {
        return Err(Error::spec(format!("correlation {corr} gives a singular innovation covariance")));
    }
    let mut r = rng.rng();
    let draws = normals(&mut r, n * (d + 1));
    let resid_sd = (1.0 - d as f64 * corr * corr).sqrt();
    let mut x = DMatrix::zeros(n, d);
    let mut y = Vec::with_capacity(n);
    let mut level = vec![0.0; d];
    for t in 0..n {
        let row = &draws[t * (d + 1)..(t + 1) * (d + 1)];
        let mut u = resid_sd * row[d];
        for j in 0..d {
            level[j] += row[j];
            x[(t, j)] = level[j];
            u += corr * row[j];
        }
        y.push(mu + beta.iter().zip(&level).map(|(b, l)| b * l).sum::<f64>() + u);
    }
    Ok((TimeSeries::new(y)?, MultiSeries::new(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn shin_hand_example() {
        let v = [1.0, -1.0, 1.0, -1.0];
        let k = KernelSpec::bartlett(0.5);
        assert_relative_eq!(shin_vn_residuals(&v, &k, ShinVariance::Kernel).unwrap(), 0.125);
        assert_relative_eq!(shin_vn_residuals(&v, &k, ShinVariance::ShortRun).unwrap(), 0.125);
    }

    #[test]
    fn too_short_sample() {
        let y = TimeSeries::new(vec![1.0, 2.0, 3.0]).unwrap();
        let x = MultiSeries::new(DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 3.0])).unwrap();
        assert!(matches!(fmols(&y, &x, &KernelSpec::bartlett(2.0)), Err(Error::Size(_))));
    }

    #[test]
    fn constant_regressor_is_rank_error() {
        let y = TimeSeries::new(vec![2.0; 20]).unwrap();
        let x = MultiSeries::new(DMatrix::from_element(20, 1, 1.0)).unwrap();
        assert!(matches!(shin_vn(&y, &x, &KernelSpec::bartlett(2.0), ShinVariance::Kernel), Err(Error::Rank(_))));
    }

    #[test]
    fn scores_sum_to_zero() {
        let (y, x) = simulate_cointegration(0.3, &[1.0], 0.6, 300, RngSpec::new(4, 0)).unwrap();
        let r = fk_break_test(&y, &x, &KernelSpec::bartlett(5.0), BreakPoint::Known(299)).unwrap_err();
        // the last split leaves an empty second regime
        assert!(matches!(r, Error::Domain(_)));
        let fit = fm_fit(&y, &x, &KernelSpec::bartlett(5.0)).unwrap();
        let t = fit.res.nobs as f64;
        let mut s = fit.z.tr_mul(&DVector::from_column_slice(fit.res.residuals_plus.values()));
        s[1] -= t * fit.res.delta_plus[0];
        assert!(s.amax() < 1e-8 * t, "{s}");
    }

    #[test]
    fn fk_scale_invariance() {
        let (y, x) = simulate_cointegration(0.0, &[2.0], 0.5, 200, RngSpec::new(9, 1)).unwrap();
        let k = KernelSpec::bartlett(4.0);
        let a = fk_break_test(&y, &x, &k, BreakPoint::Known(100)).unwrap();
        let b = fk_break_test(&y.scaled(3.5), &x, &k, BreakPoint::Known(100)).unwrap();
        assert_relative_eq!(a.stat, b.stat, max_relative = 1e-9);
        assert_eq!(a.df, 2);
    }

    #[test]
    fn shin_location_invariance() {
        let (y, x) = simulate_cointegration(0.0, &[1.0], 0.2, 150, RngSpec::new(2, 2)).unwrap();
        let k = KernelSpec::bartlett(4.0);
        let a = shin_vn(&y, &x, &k, ShinVariance::Kernel).unwrap();
        let b = shin_vn(&y.shifted(10.0), &x, &k, ShinVariance::Kernel).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }
}
