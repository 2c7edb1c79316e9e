//! Small dense least-squares helpers shared by the estimators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot tolerance below which a Gram matrix is treated as singular.
const PIVOT_TOL: f64 = 1e-12;

/// Inverse of a symmetric positive definite matrix, failing with a rank
/// error when a Cholesky pivot collapses relative to its diagonal entry.
pub fn inv_spd(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol = checked_cholesky(a, what)?;
    Ok(chol.inverse())
}

pub fn solve_spd(a: &DMatrix<f64>, b: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let chol = checked_cholesky(a, what)?;
    Ok(chol.solve(b))
}

pub fn checked_cholesky(a: &DMatrix<f64>, what: &str) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::Rank(format!("{what}: not a square matrix")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Rank(format!("{what}: non-finite entries")));
    }
    let chol = a.clone().cholesky().ok_or_else(|| Error::Rank(format!("{what} is singular")))?;
    let l = chol.l_dirty();
    for i in 0..a.nrows() {
        let d = a[(i, i)];
        if !(d > 0.0) || l[(i, i)] * l[(i, i)] < PIVOT_TOL * d {
            return Err(Error::Rank(format!("{what} is singular")));
        }
    }
    Ok(chol)
}

/// Inverse of a general square matrix, failing when its reciprocal
/// condition number (ratio of extreme singular values) is below `1e-13`.
pub fn inv_general(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() || a.nrows() == 0 || a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Rank(format!("{what}: not a finite square matrix")));
    }
    let sv = a.clone().svd(false, false).singular_values;
    let (lo, hi) = (sv.min(), sv.max());
    if !(hi > 0.0) || lo < 1e-13 * hi {
        return Err(Error::Rank(format!("{what} is singular")));
    }
    a.clone().try_inverse().ok_or_else(|| Error::Rank(format!("{what} is singular")))
}

/// Ordinary least-squares fit `y = X b + e`.
#[derive(Debug, Clone)]
pub struct Ols {
    pub coef: DVector<f64>,
    pub resid: DVector<f64>,
    pub xtx_inv: DMatrix<f64>,
    pub ssr: f64,
}

impl Ols {
    pub fn fit(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Ols> {
        let (n, k) = x.shape();
        if n != y.len() {
            return Err(Error::Size(format!("design has {n} rows, response {}", y.len())));
        }
        if n <= k {
            return Err(Error::Size(format!("{n} observations for {k} regressors")));
        }
        let xtx = x.tr_mul(x);
        let xtx_inv = inv_spd(&xtx, "design Gram matrix")?;
        let coef = &xtx_inv * x.tr_mul(y);
        let resid = y - x * &coef;
        let ssr = resid.norm_squared();
        Ok(Ols { coef, resid, xtx_inv, ssr })
    }

    pub fn dof(&self) -> usize {
        self.resid.len() - self.coef.len()
    }

    /// Residual variance with divisor `n - k`.
    pub fn s2(&self) -> f64 {
        self.ssr / self.dof() as f64
    }

    pub fn se(&self, i: usize) -> f64 {
        (self.s2() * self.xtx_inv[(i, i)]).sqrt()
    }
}

/// Symmetric square root of a positive semi-definite matrix.
pub fn sqrt_psd(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}
