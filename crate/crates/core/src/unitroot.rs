//! Autoregressive fitting and unit-root statistics: ADF regressions,
//! Phillips' semiparametric `Z_alpha` / `Z_t`, and simulated Dickey-Fuller
//! critical values.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Ols;
use crate::lrv::{hac_lrv_scalar, KernelSpec};
use crate::mc::QuantileTable;
use crate::series::{normals, RngSpec, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deterministic {
    None,
    Const,
    Trend,
}

impl Deterministic {
    pub fn terms(&self) -> usize {
        match self {
            Deterministic::None => 0,
            Deterministic::Const => 1,
            Deterministic::Trend => 2,
        }
    }
}

impl std::str::FromStr for Deterministic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Deterministic::None),
            "const" | "c" => Ok(Deterministic::Const),
            "trend" | "ct" => Ok(Deterministic::Trend),
            other => Err(Error::Parse(format!("unknown deterministic `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// The kernel long-run variance came out non-positive (possible with
    /// the truncated kernel); `z_t` is reported as NaN.
    NonPositiveLrv(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitRootResult {
    pub rho_hat: f64,
    pub t_stat: f64,
    pub z_alpha: f64,
    pub z_t: f64,
    /// Short-run residual variance entering the statistic.
    pub s2_u: f64,
    /// Long-run residual variance entering the statistic.
    pub s2_t: f64,
    pub lags: usize,
    pub deterministic: Deterministic,
    /// Number of observations in the regression.
    pub nobs: usize,
    pub status: Status,
}

/// Least-squares autoregression of order `p`.
#[derive(Debug, Clone)]
pub struct ArFit {
    /// Lag coefficients first, then constant and trend when present.
    pub coeffs: DVector<f64>,
    pub residuals: TimeSeries,
    pub covariance: DMatrix<f64>,
    pub s2: f64,
}

fn det_columns(det: Deterministic, t: usize) -> impl Iterator<Item = f64> {
    let vals = [1.0, (t + 1) as f64];
    vals.into_iter().take(det.terms())
}

/// Fit `X_t = sum_{j<=p} a_j X_{t-j} + deterministics + e_t`.
pub fn ols_ar(ts: &TimeSeries, p: usize, det: Deterministic) -> Result<ArFit> {
    let n = ts.len();
    let k = p + det.terms();
    if n <= p + det.terms() + 1 || n - p <= k {
        return Err(Error::Size(format!("AR({p}) with {} deterministic terms needs more than {n} points", det.terms())));
    }
    let y = ts.values();
    let rows = n - p;
    let x = DMatrix::from_fn(rows, k, |r, c| {
        let t = r + p;
        if c < p { y[t - 1 - c] } else { det_columns(det, t).nth(c - p).unwrap() }
    });
    let yy = DVector::from_iterator(rows, y[p..].iter().copied());
    let fit = Ols::fit(&x, &yy)?;
    let s2 = fit.s2();
    Ok(ArFit {
        covariance: &fit.xtx_inv * s2,
        coeffs: fit.coef,
        residuals: TimeSeries::new(fit.resid.iter().copied().collect())?,
        s2,
    })
}

/// Rule-of-thumb ADF lag order `floor(4 (n/100)^(1/4))`.
pub fn adf_default_lags(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Augmented Dickey-Fuller regression
/// `X_t = rho X_{t-1} + sum_{j<=p} a_j dX_{t-j} + deterministics + e_t`
/// and the t-ratio for `rho = 1`.
pub fn adf_test(ts: &TimeSeries, p: usize, det: Deterministic) -> Result<UnitRootResult> {
    let n = ts.len();
    if n <= p + 3 + det.terms() {
        return Err(Error::Size(format!("ADF({p}) needs n > {}", p + 3 + det.terms())));
    }
    let y = ts.values();
    let dy = ts.diff();
    // first usable t (0-based) has p lagged differences available
    let start = p + 1;
    let rows = n - start;
    let k = 1 + p + det.terms();
    let x = DMatrix::from_fn(rows, k, |r, c| {
        let t = r + start;
        match c {
            0 => y[t - 1],
            c if c <= p => dy[t - 1 - c],
            c => det_columns(det, t).nth(c - 1 - p).unwrap(),
        }
    });
    let yy = DVector::from_iterator(rows, y[start..].iter().copied());
    let fit = Ols::fit(&x, &yy)?;
    let rho = fit.coef[0];
    let t_stat = (rho - 1.0) / fit.se(0);
    let s2 = fit.s2();
    Ok(UnitRootResult {
        rho_hat: rho,
        t_stat,
        z_alpha: rows as f64 * (rho - 1.0),
        z_t: t_stat,
        s2_u: s2,
        s2_t: s2,
        lags: p,
        deterministic: det,
        nobs: rows,
        status: Status::Ok,
    })
}

/// Closed-form first-order regression `y_t = alpha y_{t-1} (+ mu) + u_t`.
#[derive(Debug, Clone)]
pub(crate) struct Ar1Regression {
    pub alpha: f64,
    pub resid: Vec<f64>,
    pub ssr: f64,
    /// `sum (y_{t-1} - mean)^2`, demeaned only with a constant.
    pub sxx: f64,
    pub nobs: usize,
    pub k: usize,
}

impl Ar1Regression {
    pub fn fit(y: &[f64], det: Deterministic) -> Result<Self> {
        if det == Deterministic::Trend {
            return Err(Error::spec("first-order regression supports none or const only"));
        }
        let n = y.len();
        if n < 3 {
            return Err(Error::Size("need at least 3 observations".into()));
        }
        let lag = &y[..n - 1];
        let cur = &y[1..];
        let t = (n - 1) as f64;
        let (ml, mc) = match det {
            Deterministic::Const => (lag.iter().sum::<f64>() / t, cur.iter().sum::<f64>() / t),
            _ => (0.0, 0.0),
        };
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for (a, b) in lag.iter().zip(cur) {
            sxx += (a - ml) * (a - ml);
            sxy += (a - ml) * (b - mc);
        }
        let scale = lag.iter().map(|v| v * v).sum::<f64>();
        if !(sxx > 1e-14 * scale.max(f64::MIN_POSITIVE)) || sxx == 0.0 {
            return Err(Error::Rank("lagged level has no variation".into()));
        }
        let alpha = sxy / sxx;
        let mu = mc - alpha * ml;
        let resid: Vec<f64> = lag.iter().zip(cur).map(|(a, b)| b - mu - alpha * a).collect();
        let ssr = resid.iter().map(|r| r * r).sum();
        Ok(Ar1Regression { alpha, resid, ssr, sxx, nobs: n - 1, k: 1 + det.terms() })
    }

    pub fn t_stat(&self) -> f64 {
        let s2 = self.ssr / (self.nobs - self.k) as f64;
        (self.alpha - 1.0) / (s2 / self.sxx).sqrt()
    }

    pub fn coef_stat(&self) -> f64 {
        self.nobs as f64 * (self.alpha - 1.0)
    }
}

/// Phillips' `Z_alpha` and `Z_t`:
///
/// ```text
/// Z_alpha = T(a - 1) - (s2_T - s2_u) / (2 T^-2 sum y_{t-1}^2)
/// Z_t     = (sum y_{t-1}^2)^(1/2) (a - 1) / s_T
///           - (s2_T - s2_u) / (2 s_T (T^-2 sum y_{t-1}^2)^(1/2))
/// ```
///
/// `s2_u = SSR / T` and `s2_T` is the kernel long-run variance of the
/// residuals, both with divisor `T`, so a bandwidth below one gives
/// `Z_alpha = T(a - 1)` exactly. With a constant, `y_{t-1}` is demeaned.
pub fn phillips_z(ts: &TimeSeries, kernel: &KernelSpec, det: Deterministic) -> Result<UnitRootResult> {
    kernel.validate()?;
    if det == Deterministic::Trend {
        return Err(Error::spec("Phillips Z supports none or const only"));
    }
    if ts.len() < 10 {
        return Err(Error::Size("Phillips Z needs n >= 10".into()));
    }
    let reg = Ar1Regression::fit(ts.values(), det)?;
    let scale = ts.values().iter().map(|v| v * v).sum::<f64>() / ts.len() as f64;
    if reg.ssr <= 1e-24 * scale.max(1.0) * reg.nobs as f64 {
        return Err(Error::Degenerate("regression residuals are identically zero".into()));
    }
    let t = reg.nobs as f64;
    let s2_u = reg.ssr / t;
    let s2_t = hac_lrv_scalar(&reg.resid, kernel, false)?;
    let m = reg.sxx / (t * t);
    let z_alpha = t * (reg.alpha - 1.0) - 0.5 * (s2_t - s2_u) / m;
    let (z_t, status) = if s2_t > 0.0 {
        let s_t = s2_t.sqrt();
        (reg.sxx.sqrt() * (reg.alpha - 1.0) / s_t - 0.5 * (s2_t - s2_u) / (s_t * m.sqrt()), Status::Ok)
    } else {
        (f64::NAN, Status::NonPositiveLrv(s2_t))
    };
    Ok(UnitRootResult {
        rho_hat: reg.alpha,
        t_stat: reg.t_stat(),
        z_alpha,
        z_t,
        s2_u,
        s2_t,
        lags: 0,
        deterministic: det,
        nobs: reg.nobs,
        status,
    })
}

/// Simulated null quantiles of `T(a - 1)` and of the t-ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct DfTables {
    pub coef: QuantileTable,
    pub tstat: QuantileTable,
}

/// Raw draws of `(T(a - 1), t)` under a Gaussian random walk of length `n`.
pub fn df_limit_draws(n: usize, det: Deterministic, reps: usize, rng: RngSpec) -> Result<Vec<(f64, f64)>> {
    if det == Deterministic::Trend {
        return Err(Error::spec("Dickey-Fuller simulation supports none or const only"));
    }
    if n < 10 {
        return Err(Error::Size("random walks need n >= 10".into()));
    }
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let e = normals(&mut rng.offset(r as u64).rng(), n);
            let mut acc = 0.0;
            let y: Vec<f64> = e.iter().map(|v| { acc += v; acc }).collect();
            let reg = Ar1Regression::fit(&y, det)?;
            Ok((reg.coef_stat(), reg.t_stat()))
        })
        .collect()
}

/// Quantile tables of the Dickey-Fuller functionals for sample size `n`.
/// Critical values are always simulated here, never hard-coded.
pub fn df_limit_mc(n: usize, det: Deterministic, reps: usize, rng: RngSpec) -> Result<DfTables> {
    if reps < 100 {
        return Err(Error::Size("df_limit_mc needs reps >= 100".into()));
    }
    let draws = df_limit_draws(n, det, reps, rng)?;
    let coef: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let tstat: Vec<f64> = draws.iter().map(|d| d.1).collect();
    Ok(DfTables {
        coef: QuantileTable::from_sample(&coef, &QuantileTable::DEFAULT_PROBS, rng),
        tstat: QuantileTable::from_sample(&tstat, &QuantileTable::DEFAULT_PROBS, rng),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hand_ar1() {
        let fit = ols_ar(&ts(&[1.0, 2.0, 3.0]), 1, Deterministic::None).unwrap();
        assert_relative_eq!(fit.coeffs[0], 1.6, epsilon = 1e-14);
        assert_eq!(fit.residuals.len(), 2);
        assert!(matches!(ols_ar(&ts(&[1.0, 2.0]), 1, Deterministic::None), Err(Error::Size(_))));
        assert!(matches!(ols_ar(&ts(&[1.0, 2.0, 3.0]), 1, Deterministic::Const), Err(Error::Size(_))));
    }

    #[test]
    fn explosive_series_has_positive_t() {
        let y: Vec<f64> = (1..=20).map(|t| 2f64.powi(t)).collect();
        let r = adf_test(&ts(&y), 0, Deterministic::None).unwrap();
        assert!(r.rho_hat > 1.0);
        assert!(r.t_stat > 0.0);
    }

    #[test]
    fn closed_form_matches_general_ols() {
        let y = [0.3, 0.1, 0.9, 1.4, 1.2, 2.0, 2.2, 1.7, 2.9, 3.1, 2.8, 3.6];
        for det in [Deterministic::None, Deterministic::Const] {
            let general = adf_test(&ts(&y), 0, det).unwrap();
            let closed = Ar1Regression::fit(&y, det).unwrap();
            assert_relative_eq!(general.rho_hat, closed.alpha, epsilon = 1e-12);
            assert_relative_eq!(general.t_stat, closed.t_stat(), epsilon = 1e-10);
        }
    }

    #[test]
    fn perfect_line_is_degenerate() {
        let y: Vec<f64> = (0..30).map(|t| t as f64).collect();
        let err = phillips_z(&ts(&y), &KernelSpec::bartlett(3.0), Deterministic::Const).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)), "{err:?}");
    }

    #[test]
    fn short_bandwidth_z_identity() {
        let y = [0.3, 0.1, 0.9, 1.4, 1.2, 2.0, 2.2, 1.7, 2.9, 3.1, 2.8, 3.6];
        for det in [Deterministic::None, Deterministic::Const] {
            let r = phillips_z(&ts(&y), &KernelSpec::bartlett(0.5), det).unwrap();
            assert_eq!(r.s2_t, r.s2_u);
            assert_eq!(r.z_alpha, r.nobs as f64 * (r.rho_hat - 1.0));
        }
    }

    #[test]
    fn truncated_kernel_can_flag_negative_lrv() {
        // strongly alternating residuals give a negative truncated estimate
        let y: Vec<f64> = (0..40).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 } + 0.01 * t as f64).collect();
        let k = KernelSpec::new(crate::lrv::KernelFamily::Truncated, 5.0).unwrap();
        let r = phillips_z(&ts(&y), &k, Deterministic::Const).unwrap();
        if r.s2_t <= 0.0 {
            assert!(matches!(r.status, Status::NonPositiveLrv(_)));
            assert!(r.z_t.is_nan());
        }
    }

    #[test]
    fn df_table_rejects_few_reps() {
        assert!(df_limit_mc(100, Deterministic::None, 50, RngSpec::default()).is_err());
    }

    #[test]
    fn default_lag_rule() {
        assert_eq!(adf_default_lags(100), 4);
        assert_eq!(adf_default_lags(1000), 7);
    }
}
