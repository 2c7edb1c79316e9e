//! Sample containers, the RNG stream contract and the data-generating
//! processes used throughout the crate.
//!
//! Autoregressive roots follow a single sign convention everywhere:
//!
//! ```text
//! rho_n = 1 + c / n^gamma
//! ```
//!
//! so `c < 0` is near-stationary, `c = 0` a unit root and `c > 0` mildly
//! explosive. `gamma = 1` gives the local-to-unity case, `gamma in (0,1)` the
//! mildly integrated one.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Ordered, finite, non-empty sequence of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::spec("time series must have at least one observation"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::spec(format!("non-finite value at index {i}")));
        }
        Ok(TimeSeries(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// First differences; length `n - 1`.
    pub fn diff(&self) -> Vec<f64> {
        self.0.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Single-column view.
    pub fn to_multi(&self) -> MultiSeries {
        MultiSeries(DMatrix::from_column_slice(self.len(), 1, &self.0))
    }

    pub fn scaled(&self, a: f64) -> TimeSeries {
        TimeSeries(self.0.iter().map(|v| v * a).collect())
    }

    pub fn shifted(&self, a: f64) -> TimeSeries {
        TimeSeries(self.0.iter().map(|v| v + a).collect())
    }
}

impl std::ops::Index<usize> for TimeSeries {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `n x d` panel of observations: rows are time, columns are components.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries(DMatrix<f64>);

impl MultiSeries {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::spec("multi-series needs n >= 1 and d >= 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::spec("multi-series contains non-finite values"));
        }
        Ok(MultiSeries(values))
    }

    pub fn from_columns(cols: &[TimeSeries]) -> Result<Self> {
        let first = cols.first().ok_or_else(|| Error::spec("no columns"))?;
        let n = first.len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::spec("columns differ in length"));
        }
        Ok(MultiSeries(DMatrix::from_fn(n, cols.len(), |t, j| cols[j][t])))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn column(&self, j: usize) -> TimeSeries {
        TimeSeries(self.0.column(j).iter().copied().collect())
    }

    pub fn row(&self, t: usize) -> DVector<f64> {
        self.0.row(t).transpose()
    }
}

/// Seed plus sub-stream id. Together they fully determine every draw.
///
/// Replication `r` of an experiment uses `stream + r`, so results do not
/// depend on how replications are scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Stream for replication `r`.
    pub fn offset(&self, r: u64) -> RngSpec {
        RngSpec { seed: self.seed, stream: self.stream.wrapping_add(r) }
    }
}

pub(crate) fn normals<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Localizing coefficient and exponent of `rho_n = 1 + c / n^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LurSpec {
    pub c: f64,
    pub gamma: f64,
}

impl LurSpec {
    pub fn new(c: f64, gamma: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::spec("localizing coefficient must be finite"));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::spec(format!("gamma = {gamma} outside [0, 1]")));
        }
        Ok(LurSpec { c, gamma })
    }

    pub fn unit_root() -> Self {
        LurSpec { c: 0.0, gamma: 1.0 }
    }

    /// Spec whose root at sample size `n` equals `rho` exactly.
    pub fn from_rho(rho: f64, gamma: f64, n: usize) -> Result<Self> {
        LurSpec::new((rho - 1.0) * (n as f64).powf(gamma), gamma)
    }

    pub fn rho(&self, n: usize) -> f64 {
        1.0 + self.c / (n as f64).powf(self.gamma)
    }
}

/// Finite moving-average filter `X_t = sum_j c_j e_{t-j}` with Gaussian
/// innovations of standard deviation `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProcessSpec {
    pub coeffs: Vec<f64>,
    pub sigma: f64,
}

impl LinearProcessSpec {
    pub fn new(coeffs: Vec<f64>, sigma: f64) -> Result<Self> {
        let spec = LinearProcessSpec { coeffs, sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn white_noise(sigma: f64) -> Result<Self> {
        Self::new(vec![1.0], sigma)
    }

    /// MA truncation of a stationary AR(1) with coefficient `phi`: `q + 1`
    /// terms `phi^j`.
    pub fn ar1_truncated(phi: f64, sigma: f64, q: usize) -> Result<Self> {
        Self::new((0..=q).map(|j| phi.powi(j as i32)).collect(), sigma)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::spec(format!("sigma = {} must be > 0", self.sigma)));
        }
        if self.coeffs.is_empty() || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::spec("filter coefficients must be finite and non-empty"));
        }
        Ok(())
    }

    /// Filter order `q`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `omega^2 = (sum_j c_j)^2 sigma^2`.
    pub fn long_run_variance(&self) -> f64 {
        let s: f64 = self.coeffs.iter().sum();
        s * s * self.sigma * self.sigma
    }

    /// Population autocovariance `gamma(h) = sigma^2 sum_j c_j c_{j+|h|}`.
    pub fn autocovariance(&self, h: i64) -> f64 {
        let h = h.unsigned_abs() as usize;
        if h >= self.coeffs.len() {
            return 0.0;
        }
        let s: f64 = self.coeffs.iter().zip(&self.coeffs[h..]).map(|(a, b)| a * b).sum();
        self.sigma * self.sigma * s
    }

    /// Apply the filter to `innov`, whose first `q` entries are presample.
    fn filter(&self, innov: &[f64]) -> Vec<f64> {
        let q = self.order();
        (q..innov.len())
            .map(|t| self.coeffs.iter().enumerate().map(|(j, c)| c * innov[t - j]).sum())
            .collect()
    }
}

/// Exact long-run variance of a linear process.
pub fn long_run_variance_true(spec: &LinearProcessSpec) -> f64 {
    spec.long_run_variance()
}

/// Simulate `X_1..X_n`; `q` presample innovations feed the first observation
/// so every `X_t` uses the full filter.
pub fn simulate_linear_process(spec: &LinearProcessSpec, n: usize, rng: RngSpec) -> Result<TimeSeries> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::spec("n must be >= 1"));
    }
    let mut r = rng.rng();
    let innov: Vec<f64> = normals(&mut r, n + spec.order()).into_iter().map(|e| e * spec.sigma).collect();
    TimeSeries::new(spec.filter(&innov))
}

/// Innovation source for autoregressive simulators.
#[derive(Debug, Clone, Copy)]
pub enum Innovations<'a> {
    /// User-supplied draws (Rademacher, heavy tails, ...); the first `n` are used.
    Series(&'a TimeSeries),
    Linear(&'a LinearProcessSpec),
}

impl Innovations<'_> {
    fn draw(&self, n: usize, rng: RngSpec) -> Result<Vec<f64>> {
        match self {
            Innovations::Series(ts) => {
                if ts.len() < n {
                    return Err(Error::Size(format!("{} innovations supplied, {n} needed", ts.len())));
                }
                Ok(ts.values()[..n].to_vec())
            }
            Innovations::Linear(spec) => Ok(simulate_linear_process(spec, n, rng)?.into_vec()),
        }
    }
}

/// `x_t = rho_n x_{t-1} + e_t`, returning `x_1..x_n` given `x_0`.
pub fn simulate_lur_ar(
    lur: &LurSpec,
    innovations: Innovations<'_>,
    x0: f64,
    n: usize,
    rng: RngSpec,
) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::spec("n must be >= 1"));
    }
    let rho = lur.rho(n);
    let e = innovations.draw(n, rng)?;
    let mut prev = x0;
    let out = e
        .iter()
        .map(|et| {
            prev = rho * prev + et;
            prev
        })
        .collect();
    TimeSeries::new(out)
}

/// Predictive-regression system with persistent regressors.
///
/// ```text
/// y_t = intercept + beta' x_{t-1} + u_t
/// x_t = R_n x_{t-1} + w_t,   R_n = diag(rho_n(c_i, gamma_i))
/// w_t = Phi w_{t-1} + v_t    (Phi diagonal, optional)
/// (u_t, v_t') ~ N(0, sigma_ee)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub beta: DVector<f64>,
    pub intercept: f64,
    pub lur: Vec<LurSpec>,
    pub sigma_ee: DMatrix<f64>,
    /// Diagonal AR(1) coefficients filtering the regressor innovations.
    pub v_filter: Option<Vec<f64>>,
}

impl SystemSpec {
    /// Scalar-regressor system with unit variances and `corr(u, v) = corr`.
    pub fn scalar(beta: f64, lur: LurSpec, corr: f64) -> Self {
        SystemSpec {
            beta: DVector::from_element(1, beta),
            intercept: 0.0,
            lur: vec![lur],
            sigma_ee: DMatrix::from_row_slice(2, 2, &[1.0, corr, corr, 1.0]),
            v_filter: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    fn validate(&self) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
        let d = self.dim();
        if d == 0 || self.lur.len() != d {
            return Err(Error::spec("beta and lur must have equal, non-zero length"));
        }
        if self.sigma_ee.shape() != (d + 1, d + 1) {
            return Err(Error::spec(format!("sigma_ee must be {0}x{0}", d + 1)));
        }
        if (&self.sigma_ee - self.sigma_ee.transpose()).abs().max() > 1e-12 {
            return Err(Error::spec("sigma_ee must be symmetric"));
        }
        if let Some(phi) = &self.v_filter {
            if phi.len() != d || phi.iter().any(|p| p.abs() >= 1.0) {
                return Err(Error::spec("v_filter needs d coefficients with |phi| < 1"));
            }
        }
        self.sigma_ee
            .clone()
            .cholesky()
            .ok_or_else(|| Error::spec("sigma_ee is not positive definite"))
    }
}

/// Simulate `(y_1..y_n, x_1..x_n)` with `x_0 = 0`. Estimators regress `y_t`
/// on `x_{t-1}`, so the first pair is used only through `x_1`.
pub fn simulate_predictive_system(spec: &SystemSpec, n: usize, rng: RngSpec) -> Result<(TimeSeries, MultiSeries)> {
    let chol = spec.validate()?;
    if n < 2 {
        return Err(Error::Size("predictive system needs n >= 2".into()));
    }
    let d = spec.dim();
    let l = chol.l();
    let rho: Vec<f64> = spec.lur.iter().map(|s| s.rho(n)).collect();
    let mut r = rng.rng();
    let mut x_prev = DVector::<f64>::zeros(d);
    let mut w_prev = DVector::<f64>::zeros(d);
    let mut y = Vec::with_capacity(n);
    let mut x = DMatrix::<f64>::zeros(n, d);
    for t in 0..n {
        let z = DVector::from_vec(normals(&mut r, d + 1));
        let e = &l * z;
        y.push(spec.intercept + spec.beta.dot(&x_prev) + e[0]);
        let v = e.rows(1, d).into_owned();
        let w = match &spec.v_filter {
            Some(phi) => DVector::from_fn(d, |i, _| phi[i] * w_prev[i] + v[i]),
            None => v,
        };
        for i in 0..d {
            x[(t, i)] = rho[i] * x_prev[i] + w[i];
        }
        x_prev = x.row(t).transpose();
        w_prev = w;
    }
    Ok((TimeSeries::new(y)?, MultiSeries::new(x)?))
}

/// Exact discretization of `dJ = c J dr + sigma dW`, `J(0) = 0`, on `n`
/// equally spaced points spanning `[0, horizon]`.
pub fn simulate_ou_exact(c: f64, sigma: f64, n: usize, horizon: f64, rng: RngSpec) -> Result<TimeSeries> {
    if n < 2 {
        return Err(Error::Size("OU grid needs n >= 2".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::spec("horizon must be > 0"));
    }
    let h = horizon / (n - 1) as f64;
    let a = (c * h).exp();
    let sd = if c == 0.0 {
        sigma * h.sqrt()
    } else {
        sigma * (((2.0 * c * h).exp() - 1.0) / (2.0 * c)).sqrt()
    };
    let mut r = rng.rng();
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let mut j = 0.0;
    for z in normals(&mut r, n - 1) {
        j = a * j + sd * z;
        out.push(j);
    }
    TimeSeries::new(out)
}

/// `(1/sqrt(n)) sum_{t <= floor(n r)} x_t`. Scaling by the long-run standard
/// deviation is left to the caller.
pub fn partial_sum_process(ts: &TimeSeries, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, 1]")));
    }
    let n = ts.len();
    let k = ((n as f64) * r).floor() as usize;
    Ok(ts.values()[..k.min(n)].iter().sum::<f64>() / (n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn long_run_variance_of_ma1() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5], 2.0).unwrap();
        assert_relative_eq!(long_run_variance_true(&spec), 9.0);
        assert_relative_eq!(spec.autocovariance(1), 2.0);
        assert_relative_eq!(spec.autocovariance(-1), 2.0);
        assert_eq!(spec.autocovariance(2), 0.0);
        let over = LinearProcessSpec::new(vec![1.0, -1.0], 1.0).unwrap();
        assert_eq!(over.long_run_variance(), 0.0);
        assert_eq!(LinearProcessSpec::white_noise(1.0).unwrap().long_run_variance(), 1.0);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(LinearProcessSpec::new(vec![1.0], 0.0), Err(Error::InvalidSpec(_))));
        let spec = LinearProcessSpec::white_noise(1.0).unwrap();
        assert!(matches!(simulate_linear_process(&spec, 0, RngSpec::default()), Err(Error::InvalidSpec(_))));
        assert!(LurSpec::new(1.0, 1.5).is_err());
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn linear_process_burn_in_uses_full_filter() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.5, 0.25], 1.0).unwrap();
        let rng = RngSpec::new(7, 3);
        let x = simulate_linear_process(&spec, 5, rng).unwrap();
        let e = normals(&mut rng.rng(), 7);
        for t in 0..5 {
            let want = e[t + 2] + 0.5 * e[t + 1] + 0.25 * e[t];
            assert_relative_eq!(x[t], want, epsilon = 1e-15);
        }
    }

    #[test]
    fn reproducible_streams() {
        let spec = LinearProcessSpec::new(vec![1.0, 0.3], 1.5).unwrap();
        let a = simulate_linear_process(&spec, 100, RngSpec::new(1, 2)).unwrap();
        let b = simulate_linear_process(&spec, 100, RngSpec::new(1, 2)).unwrap();
        let c = simulate_linear_process(&spec, 100, RngSpec::new(1, 3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lur_deterministic_recursion() {
        let n = 3;
        let lur = LurSpec::from_rho(0.5, 0.7, n).unwrap();
        assert_relative_eq!(lur.rho(n), 0.5, epsilon = 1e-15);
        let zeros = TimeSeries::new(vec![0.0; 3]).unwrap();
        let x = simulate_lur_ar(&lur, Innovations::Series(&zeros), 8.0, n, RngSpec::default()).unwrap();
        assert_eq!(x.values(), &[4.0, 2.0, 1.0]);
    }

    #[test]
    fn lur_unit_root_is_cumulative_sum() {
        let e = TimeSeries::new(vec![0.5, -1.25, 2.0, 0.125]).unwrap();
        let x = simulate_lur_ar(&LurSpec::unit_root(), Innovations::Series(&e), 1.0, 4, RngSpec::default()).unwrap();
        assert_eq!(x.values(), &[1.5, 0.25, 2.25, 2.375]);
    }

    #[test]
    fn ou_degenerate_cases() {
        let zero = simulate_ou_exact(-1.0, 0.0, 50, 1.0, RngSpec::new(3, 0)).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
        let bm = simulate_ou_exact(0.0, 1.0, 11, 1.0, RngSpec::new(3, 0)).unwrap();
        assert_eq!(bm[0], 0.0);
        assert_eq!(bm.len(), 11);
    }

    #[test]
    fn partial_sums() {
        let ts = TimeSeries::new(vec![1.0; 4]).unwrap();
        assert_eq!(partial_sum_process(&ts, 0.0).unwrap(), 0.0);
        assert_eq!(partial_sum_process(&ts, 1.0).unwrap(), 2.0);
        assert!(matches!(partial_sum_process(&ts, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn predictive_system_rejects_non_pd() {
        let mut spec = SystemSpec::scalar(0.0, LurSpec::new(-2.0, 1.0).unwrap(), 0.5);
        spec.sigma_ee = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(simulate_predictive_system(&spec, 10, RngSpec::default()), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn predictive_system_null_y_is_noise() {
        let spec = SystemSpec::scalar(0.0, LurSpec::unit_root(), 0.0);
        let (y, x) = simulate_predictive_system(&spec, 200, RngSpec::new(11, 0)).unwrap();
        assert_eq!(y.len(), 200);
        assert_eq!(x.nrows(), 200);
        // y_t = u_t, so its draws are the first component of each innovation pair
        let mut r = RngSpec::new(11, 0).rng();
        let z = normals(&mut r, 2);
        assert_relative_eq!(y[0], z[0], epsilon = 1e-15);
    }
}
