//! Recursive out-of-sample forecasts and the nested-model comparison.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::Ols;
use crate::series::{MultiSeries, TimeSeries};

/// One-step forecasts of `y[t+1]` from `x[t]'b_t` where `b_t` is OLS of
/// `y[j]` on `x[j-1]` for `j = 1..=t`, for origins `t = start..n-1`.
/// Origins whose design is still singular are skipped; the first usable
/// origin is returned with the forecasts.
pub fn recursive_forecasts(y: &[f64], x: &DMatrix<f64>, start: usize) -> Result<(usize, Vec<f64>)> {
    let n = y.len();
    let k = x.ncols();
    if x.nrows() != n {
        return Err(Error::Size("y and x lengths differ".into()));
    }
    if k == 0 {
        return Ok((start, vec![0.0; n.saturating_sub(start + 1)]));
    }
    let mut xtx = DMatrix::<f64>::zeros(k, k);
    let mut xty = DVector::<f64>::zeros(k);
    let mut first = None;
    let mut out = Vec::new();
    for t in 1..n {
        let xr = x.row(t - 1).transpose();
        xtx += &xr * xr.transpose();
        xty += &xr * y[t];
        if t < start || t + 1 >= n {
            continue;
        }
        let scale = xtx.diagonal().max().max(f64::MIN_POSITIVE);
        let Some(chol) = xtx.clone().cholesky() else { continue };
        let dmin = chol.l().diagonal().iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if first.is_none() && dmin * dmin < 1e-12 * scale {
            continue;
        }
        let b = chol.solve(&xty);
        first.get_or_insert(t);
        out.push(x.row(t).transpose().dot(&b));
    }
    let first = first.ok_or_else(|| Error::Rank("recursive design never becomes nonsingular".into()))?;
    Ok((first, out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedForecast {
    /// Running statistic after each forecast origin.
    pub path: Vec<f64>,
    pub stat: f64,
    /// First forecast origin actually used.
    pub start: usize,
    /// Full-sample residual variance of the nesting model.
    pub sigma2: f64,
    pub warning: Option<String>,
}

/// Compare recursive one-step forecasts of `y[t+1]` from `x1[t]` (nested)
/// and `(x1[t], x2[t])` (nesting) over origins `t = k0..n-2`:
///
/// ```text
/// T_n = sigma2^-1 sum_t [(y_{t+1} - ytilde_{t+1|t})^2 - (y_{t+1} - yhat_{t+1|t})^2]
/// ```
///
/// No intercept is added; pass a constant column in `x1` for one.
/// `sigma2` is the residual variance of the nesting model on the full
/// sample. `k0` below `dims + 2`, or a singular early design, postpones
/// the start with a warning.
pub fn nested_forecast_test(y: &TimeSeries, x1: &MultiSeries, x2: &MultiSeries, k0: usize) -> Result<NestedForecast> {
    let n = y.len();
    if x1.nrows() != n || x2.nrows() != n {
        return Err(Error::Size("y, x1 and x2 must have equal length".into()));
    }
    let p1 = x1.ncols();
    let p = p1 + x2.ncols();
    let mut x = DMatrix::zeros(n, p);
    x.columns_mut(0, p1).copy_from(x1.matrix());
    x.columns_mut(p1, x2.ncols()).copy_from(x2.matrix());
    let min_start = p + 2;
    if n < min_start + 2 {
        return Err(Error::Size(format!("n = {n} too short for {p} regressors")));
    }
    let mut warning = None;
    let mut start = k0;
    if k0 < min_start {
        warning = Some(format!("start postponed from {k0} to {min_start} (needs dims + 2)"));
        start = min_start;
    }

    let yv = y.values();
    let (s1, f1) = recursive_forecasts(yv, x1.matrix(), start)?;
    let (s2, f2) = recursive_forecasts(yv, &x, start)?;
    let used = s1.max(s2);
    if used > start {
        warning = Some(format!("start postponed from {k0} to {used} (singular recursive design)"));
    }
    let f1 = &f1[used - s1..];
    let f2 = &f2[used - s2..];

    let full = Ols::fit(&x.rows(0, n - 1).into_owned(), &DVector::from_column_slice(&yv[1..]))?;
    let sigma2 = full.s2();
    let mut acc = 0.0;
    let mut path = Vec::with_capacity(f1.len());
    let mut any = false;
    for (i, (a, b)) in f1.iter().zip(f2).enumerate() {
        let target = yv[used + i + 1];
        let d = (target - a).powi(2) - (target - b).powi(2);
        any |= d != 0.0;
        acc += d;
        path.push(acc);
    }
    let scale = yv.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if sigma2 <= 1e-28 * scale.max(f64::MIN_POSITIVE) {
        if any && path.iter().any(|v| v.abs() > 1e-20 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::Degenerate("nesting model fits exactly but forecasts differ".into()));
        }
        let len = path.len();
        return Ok(NestedForecast { path: vec![0.0; len], stat: 0.0, start: used, sigma2, warning });
    }
    for v in &mut path {
        *v /= sigma2;
    }
    Ok(NestedForecast { stat: *path.last().unwrap_or(&0.0), path, start: used, sigma2, warning })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursive_matches_direct_ols() {
        let n = 30;
        let x = DMatrix::from_fn(n, 2, |t, j| if j == 0 { 1.0 } else { ((t * 7) % 11) as f64 });
        let y: Vec<f64> = (0..n).map(|t| ((t * 13) % 17) as f64 * 0.3).collect();
        let (s, f) = recursive_forecasts(&y, &x, 10).unwrap();
        assert_eq!(s, 10);
        assert_eq!(f.len(), n - 1 - 10);
        let t = 15;
        let ols = Ols::fit(&x.rows(0, t).into_owned(), &DVector::from_column_slice(&y[1..=t])).unwrap();
        let direct = x.row(t).transpose().dot(&ols.coef);
        assert!((f[t - 10] - direct).abs() < 1e-10);
    }

    #[test]
    fn singular_prefix_is_skipped() {
        let n = 20;
        // second column is zero for the first eight rows
        let x = DMatrix::from_fn(n, 2, |t, j| if j == 0 { 1.0 } else if t < 8 { 0.0 } else { t as f64 });
        let y: Vec<f64> = (0..n).map(|t| t as f64).collect();
        let (s, _) = recursive_forecasts(&y, &x, 3).unwrap();
        assert_eq!(s, 9);
    }
}
