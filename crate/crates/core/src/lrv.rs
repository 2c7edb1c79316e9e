//! Sample autocovariances and kernel (HAC) long-run covariance estimation.
//!
//! ```text
//! Gamma_j  = (1/n) sum_{t=j+1}^{n} (x_t - xbar)(x_{t-j} - xbar)'
//! Lambda   = sum_{j>=1} k(j/b) Gamma_j'
//! Omega    = Gamma_0 + Lambda + Lambda'
//! ```
//!
//! The divisor is always `n`, which keeps the Bartlett estimate positive
//! semi-definite. `Lambda` is stored in the "past times present" orientation
//! `(1/n) sum_t x_{t-j} x_t'`, which is the one the cointegration
//! corrections consume.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::series::MultiSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Truncated,
    Bartlett,
    Parzen,
    QuadraticSpectral,
}

impl KernelFamily {
    /// Whether the weight vanishes outside `[-1, 1]`.
    pub fn compact(&self) -> bool {
        !matches!(self, KernelFamily::QuadraticSpectral)
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "truncated" => Ok(KernelFamily::Truncated),
            "bartlett" | "nw" | "newey-west" => Ok(KernelFamily::Bartlett),
            "parzen" => Ok(KernelFamily::Parzen),
            "qs" | "quadratic-spectral" => Ok(KernelFamily::QuadraticSpectral),
            other => Err(Error::Parse(format!("unknown kernel `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        let spec = KernelSpec { family, bandwidth };
        spec.validate()?;
        Ok(spec)
    }

    pub fn bartlett(bandwidth: f64) -> Self {
        KernelSpec { family: KernelFamily::Bartlett, bandwidth }
    }

    /// Bartlett kernel with the default bandwidth for a sample of length `n`.
    pub fn bartlett_default(n: usize) -> Self {
        Self::bartlett(default_bandwidth(n))
    }

    /// Newey-West weights `1 - j/(p+1)` for lags `j <= p`.
    pub fn newey_west(lags: usize) -> Self {
        Self::bartlett(lags as f64 + 1.0)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::spec(format!("bandwidth {} must be > 0", self.bandwidth)));
        }
        Ok(())
    }

    pub fn weight(&self, x: f64) -> f64 {
        kernel_weight(self, x)
    }
}

/// `b = ceil(1.2 n^(1/3))`.
pub fn default_bandwidth(n: usize) -> f64 {
    (1.2 * (n as f64).cbrt()).ceil()
}

/// Weight `k(x)` of the kernel family. The bandwidth is applied by callers,
/// which evaluate `k(j / b)`.
pub fn kernel_weight(spec: &KernelSpec, x: f64) -> f64 {
    let a = x.abs();
    match spec.family {
        KernelFamily::Truncated => (a <= 1.0) as u8 as f64,
        KernelFamily::Bartlett => (1.0 - a).max(0.0),
        KernelFamily::Parzen => {
            if a <= 0.5 {
                1.0 - 6.0 * a * a + 6.0 * a * a * a
            } else if a <= 1.0 {
                2.0 * (1.0 - a).powi(3)
            } else {
                0.0
            }
        }
        KernelFamily::QuadraticSpectral => {
            let z = 6.0 * std::f64::consts::PI * a / 5.0;
            if z < 1e-2 {
                // series expansion avoids cancellation near the removable singularity
                let z2 = z * z;
                return 1.0 - z2 / 10.0 + z2 * z2 / 280.0;
            }
            3.0 / (z * z) * (z.sin() / z - z.cos())
        }
    }
}

fn centered(ms: &MultiSeries, demean: bool) -> DMatrix<f64> {
    let mut x = ms.matrix().clone();
    if demean {
        for mut col in x.column_iter_mut() {
            let m = col.mean();
            col.add_scalar_mut(-m);
        }
    }
    x
}

/// `(1/n) sum_{t>j} x_t x_{t-j}'` on an already centered panel.
fn gamma_raw(x: &DMatrix<f64>, j: usize) -> DMatrix<f64> {
    let n = x.nrows();
    let lead = x.rows(j, n - j);
    let lag = x.rows(0, n - j);
    lead.tr_mul(&lag) / n as f64
}

/// Sample autocovariance `Gamma_j` with divisor `n`.
pub fn autocovariance(ms: &MultiSeries, j: usize, demean: bool) -> Result<DMatrix<f64>> {
    let n = ms.nrows();
    if j >= n {
        return Err(Error::LagTooLarge { lag: j, n });
    }
    Ok(gamma_raw(&centered(ms, demean), j))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LrvEstimate {
    /// Two-sided long-run covariance.
    pub omega: DMatrix<f64>,
    /// Weighted sum of `Gamma_j'` over `j >= 1`.
    pub lambda: DMatrix<f64>,
    pub gamma0: DMatrix<f64>,
}

impl LrvEstimate {
    /// One-sided long-run covariance including the contemporaneous term,
    /// `Gamma_0 + Lambda`.
    pub fn one_sided(&self) -> DMatrix<f64> {
        &self.gamma0 + &self.lambda
    }
}

/// Kernel long-run covariance `Omega = sum_{|j|<n} k(j/b) Gamma_j`.
///
/// Compactly supported kernels stop at `j > b`; the quadratic-spectral
/// kernel sums every lag, which costs `O(n^2 d^2)`.
pub fn hac_lrv(ms: &MultiSeries, kernel: &KernelSpec, demean: bool) -> Result<LrvEstimate> {
    kernel.validate()?;
    let n = ms.nrows();
    if n < 2 {
        return Err(Error::Size("long-run variance needs n >= 2".into()));
    }
    let x = centered(ms, demean);
    let gamma0 = gamma_raw(&x, 0);
    let d = ms.ncols();
    let mut lambda = DMatrix::zeros(d, d);
    for j in 1..n {
        let arg = j as f64 / kernel.bandwidth;
        if kernel.family.compact() && arg > 1.0 {
            break;
        }
        let w = kernel_weight(kernel, arg);
        if w != 0.0 {
            lambda += gamma_raw(&x, j).transpose() * w;
        }
    }
    let omega = &gamma0 + &lambda + lambda.transpose();
    // exact symmetry regardless of summation order
    let omega = (&omega + omega.transpose()) * 0.5;
    Ok(LrvEstimate { omega, lambda, gamma0 })
}

/// Scalar convenience wrapper returning `Omega`.
pub fn hac_lrv_scalar(x: &[f64], kernel: &KernelSpec, demean: bool) -> Result<f64> {
    let ms = MultiSeries::new(DMatrix::from_column_slice(x.len(), 1, x))?;
    Ok(hac_lrv(&ms, kernel, demean)?.omega[(0, 0)])
}
