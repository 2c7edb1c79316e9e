//! IVX estimation and Wald inference for predictive regressions
//! `y_t = mu + beta' x_{t-1} + u_t` with regressors of unknown persistence.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{inv_general, inv_spd, symmetrize};
use crate::lrv::{hac_lrv, KernelSpec};
use crate::series::{MultiSeries, TimeSeries};
use crate::stats::chi2_sf;

/// Instrument persistence `rho_nz = 1 + c_z / n^beta_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvxSpec {
    pub c_z: f64,
    pub beta_z: f64,
}

impl Default for IvxSpec {
    fn default() -> Self {
        IvxSpec { c_z: -1.0, beta_z: 0.95 }
    }
}

impl IvxSpec {
    pub fn new(c_z: f64, beta_z: f64) -> Result<Self> {
        let s = IvxSpec { c_z, beta_z };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_z < 0.0) {
            return Err(Error::spec(format!("c_z = {} must be negative", self.c_z)));
        }
        if !(self.beta_z > 0.0 && self.beta_z < 1.0) {
            return Err(Error::spec(format!("beta_z = {} outside (0, 1)", self.beta_z)));
        }
        Ok(())
    }

    pub fn rho(&self, n: usize) -> f64 {
        1.0 + self.c_z / (n as f64).powf(self.beta_z)
    }
}

/// `z_t = rho z_{t-1} + dx_t`, `z_1 = 0`, for `t = 2..n`, columnwise.
/// Any `rho` is accepted, including 1.
pub fn ivx_instrument_with_rho(x: &MultiSeries, rho: f64) -> Result<MultiSeries> {
    let m = x.matrix();
    let (n, d) = m.shape();
    if n < 2 {
        return Err(Error::Size("IVX instrument needs n >= 2".into()));
    }
    let mut z = DMatrix::zeros(n - 1, d);
    for j in 0..d {
        let mut acc = 0.0;
        for t in 1..n {
            acc = rho * acc + (m[(t, j)] - m[(t - 1, j)]);
            z[(t - 1, j)] = acc;
        }
    }
    MultiSeries::new(z)
}

/// Self-generated IVX instrument of length `n - 1` (rows are `t = 2..n`).
pub fn ivx_instrument(x: &MultiSeries, spec: &IvxSpec) -> Result<MultiSeries> {
    spec.validate()?;
    let rho = spec.rho(x.nrows());
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::spec(format!("rho_nz = {rho} outside (0, 1) at n = {}", x.nrows())));
    }
    ivx_instrument_with_rho(x, rho)
}

#[derive(Debug, Clone)]
pub struct IvxResult {
    pub beta_ivx: DVector<f64>,
    /// Homoskedastic sandwich covariance of `beta_ivx`.
    pub cov: DMatrix<f64>,
    /// Wald statistic and p-value for `beta = 0`.
    pub wald: f64,
    pub pvalue: f64,
    pub instrument: MultiSeries,
    pub residuals: TimeSeries,
    pub sigma2_u: f64,
    /// Lagged instrument `z_{t-1}`, never demeaned.
    lagged: DMatrix<f64>,
    zx_inv: DMatrix<f64>,
}

fn center_columns(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
}

/// `sigma2_u - s_uv' S_vv^{-1} s_uv`, with `v_t` the residuals of the
/// regression of `x_t` on `x_{t-1}`.
fn conditional_variance(x: &DMatrix<f64>, u: &DVector<f64>, sigma2_u: f64) -> Result<f64> {
    let t_obs = x.nrows() - 1;
    let lag = x.rows(0, t_obs).into_owned();
    let cur = x.rows(1, t_obs).into_owned();
    let coef = lag.clone().svd(true, true).solve(&cur, 1e-12).map_err(|e| Error::Rank(e.to_string()))?;
    let v = cur - lag * coef;
    let s_vv = v.tr_mul(&v) / t_obs as f64;
    let s_uv = v.tr_mul(u) / t_obs as f64;
    let s_vv_inv = inv_general(&s_vv, "regressor innovation covariance")?;
    Ok((sigma2_u - (s_uv.transpose() * s_vv_inv * &s_uv)[(0, 0)]).max(0.0))
}

/// `beta = (sum z_{t-1} x_{t-1}')^{-1} sum z_{t-1} y_t` over `t = 2..n`.
/// With `demean`, `y_t` and `x_{t-1}` are demeaned, which absorbs an
/// intercept; the instrument is always built from the raw differences.
pub fn ivx_estimate(y: &TimeSeries, x: &MultiSeries, spec: &IvxSpec, demean: bool) -> Result<IvxResult> {
    let (n, d) = (y.len(), x.ncols());
    if x.nrows() != n {
        return Err(Error::Size(format!("y has {n} rows, x has {}", x.nrows())));
    }
    if n < d + 3 {
        return Err(Error::Size(format!("need n >= d + 3 = {}, got {n}", d + 3)));
    }
    let instrument = ivx_instrument(x, spec)?;
    let t_obs = n - 1;
    let zi = instrument.matrix();
    let xm = x.matrix();
    let lagged = DMatrix::from_fn(t_obs, d, |r, c| if r == 0 { 0.0 } else { zi[(r - 1, c)] });
    let mut xl = xm.rows(0, t_obs).into_owned();
    let mut yv = DVector::from_column_slice(&y.values()[1..]);
    if demean {
        center_columns(&mut xl);
        let m = yv.mean();
        yv.add_scalar_mut(-m);
    }
    let zx = lagged.tr_mul(&xl);
    let zx_inv = inv_general(&zx, "instrument cross-moment")?;
    let beta = &zx_inv * lagged.tr_mul(&yv);
    let resid = &yv - &xl * &beta;
    let sigma2_u = resid.norm_squared() / (t_obs - d) as f64;
    let mut meat = lagged.tr_mul(&lagged) * sigma2_u;
    if demean {
        let zbar = DVector::from_fn(d, |j, _| lagged.column(j).mean());
        let w = conditional_variance(xm, &resid, sigma2_u)?;
        meat -= &zbar * zbar.transpose() * (t_obs as f64 * w);
    }
    let cov = symmetrize(&(&zx_inv * meat * zx_inv.transpose()));
    let mut res = IvxResult {
        beta_ivx: beta,
        cov,
        wald: 0.0,
        pvalue: 1.0,
        instrument,
        residuals: TimeSeries::new(resid.iter().copied().collect())?,
        sigma2_u,
        lagged,
        zx_inv,
    };
    let (w, p) = if sigma2_u > 0.0 {
        ivx_wald(&res, &DMatrix::identity(d, d), &DVector::zeros(d), None)?
    } else if res.beta_ivx.iter().all(|b| *b == 0.0) {
        (0.0, 1.0)
    } else {
        // exact fit: any non-zero slope is infinitely significant
        (f64::INFINITY, 0.0)
    };
    res.wald = w;
    res.pvalue = p;
    Ok(res)
}

/// `W = (R b - r)' [R V R']^{-1} (R b - r)` with a chi-square(q) p-value.
/// `hac = None` uses the homoskedastic meat `sigma2_u sum z z'`; a kernel
/// replaces it by `T` times the long-run variance of `z_{t-1} u_t`.
pub fn ivx_wald(
    result: &IvxResult,
    r_mat: &DMatrix<f64>,
    r: &DVector<f64>,
    hac: Option<&KernelSpec>,
) -> Result<(f64, f64)> {
    let d = result.beta_ivx.len();
    let q = r_mat.nrows();
    if r_mat.ncols() != d || r.len() != q || q == 0 {
        return Err(Error::Size(format!("restriction matrix must be q x {d} with q >= 1 and r of length q")));
    }
    let cov = match hac {
        None => result.cov.clone(),
        Some(k) => {
            let u = result.residuals.values();
            let t_obs = u.len();
            let scores = DMatrix::from_fn(t_obs, d, |t, j| result.lagged[(t, j)] * u[t]);
            let lrv = hac_lrv(&MultiSeries::new(scores)?, k, false)?;
            let meat = lrv.omega * t_obs as f64;
            symmetrize(&(&result.zx_inv * meat * result.zx_inv.transpose()))
        }
    };
    let diff = r_mat * &result.beta_ivx - r;
    let mid = inv_spd(&symmetrize(&(r_mat * cov * r_mat.transpose())), "restricted covariance")?;
    let w = (diff.transpose() * mid * &diff)[(0, 0)];
    Ok((w, chi2_sf(q as f64, w)))
}

/// OLS of `y_t` on `x_{t-1}` (demeaned when requested) with conventional
/// t-ratios; the benchmark the IVX machinery is compared against.
#[derive(Debug, Clone)]
pub struct PredictiveOls {
    pub beta: DVector<f64>,
    pub se: DVector<f64>,
}

impl PredictiveOls {
    pub fn t_ratio(&self, i: usize, value: f64) -> f64 {
        (self.beta[i] - value) / self.se[i]
    }
}

pub fn predictive_ols(y: &TimeSeries, x: &MultiSeries, demean: bool) -> Result<PredictiveOls> {
    let (n, d) = (y.len(), x.ncols());
    if x.nrows() != n || n < d + 3 {
        return Err(Error::Size("predictive OLS needs matching lengths and n >= d + 3".into()));
    }
    let mut xl = x.matrix().rows(0, n - 1).into_owned();
    let mut yv = DVector::from_column_slice(&y.values()[1..]);
    if demean {
        center_columns(&mut xl);
        let m = yv.mean();
        yv.add_scalar_mut(-m);
    }
    let xtx_inv = inv_spd(&xl.tr_mul(&xl), "regressor Gram matrix")?;
    let beta = &xtx_inv * xl.tr_mul(&yv);
    let resid = &yv - &xl * &beta;
    let dof = n - 1 - d - demean as usize;
    let s2 = resid.norm_squared() / dof as f64;
    let se = DVector::from_fn(d, |i, _| (s2 * xtx_inv[(i, i)]).sqrt());
    Ok(PredictiveOls { beta, se })
}
