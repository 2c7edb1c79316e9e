//! GARCH(1,1) variance filtering, simulation, and Gaussian
//! quasi-maximum-likelihood estimation.

use std::sync::{Arc, Mutex};

use argmin::core::observers::{Observe, ObserverMode};
use argmin::core::{CostFunction, Error as ArgminError, Executor, State, TerminationReason, TerminationStatus, KV};
use argmin::solver::neldermead::NelderMead;

use crate::error::{Error, Result};
use crate::series::{normals, RngSpec, TimeSeries};
use crate::unitroot::{ols_ar, Deterministic};

/// Upper bound on `alpha + beta` enforced by the estimator.
const PERSISTENCE_CAP: f64 = 1.0 - 1e-6;

/// `sigma2_t = omega + alpha eps_{t-1}^2 + beta sigma2_{t-1}`, `y_t = mu + eps_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchSpec {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl GarchSpec {
    pub fn new(omega: f64, alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        let s = GarchSpec { omega, alpha, beta, mu };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !(self.alpha >= 0.0) || !(self.beta >= 0.0) {
            return Err(Error::spec("GARCH needs omega > 0, alpha >= 0, beta >= 0"));
        }
        if !(self.alpha + self.beta < 1.0) {
            return Err(Error::spec(format!("alpha + beta = {} must be below 1", self.alpha + self.beta)));
        }
        if !self.mu.is_finite() {
            return Err(Error::spec("mean must be finite"));
        }
        Ok(())
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }

    fn max_abs_diff(&self, other: &GarchSpec) -> f64 {
        (self.omega - other.omega)
            .abs()
            .max((self.alpha - other.alpha).abs())
            .max((self.beta - other.beta).abs())
    }
}

fn filter_into(eps: &[f64], omega: f64, alpha: f64, beta: f64, sigma2_0: f64, out: &mut Vec<f64>) {
    out.clear();
    let mut s = sigma2_0;
    out.push(s);
    for e in &eps[..eps.len() - 1] {
        s = omega + alpha * e * e + beta * s;
        out.push(s);
    }
}

/// Conditional variances of `eps_0..eps_{n-1}`: the first entry is
/// `sigma2_0`, then `sigma2_t = omega + alpha eps_{t-1}^2 + beta sigma2_{t-1}`.
pub fn garch_filter(eps: &TimeSeries, spec: &GarchSpec, sigma2_0: f64) -> Result<TimeSeries> {
    spec.validate()?;
    if !(sigma2_0 > 0.0) {
        return Err(Error::spec("initial variance must be positive"));
    }
    let mut out = Vec::with_capacity(eps.len());
    filter_into(eps.values(), spec.omega, spec.alpha, spec.beta, sigma2_0, &mut out);
    TimeSeries::new(out)
}

/// Simulate `y_1..y_n` with Gaussian standardized shocks, started at the
/// unconditional variance after a burn-in of 500 draws. Returns the
/// series and its conditional variances.
pub fn simulate_garch(spec: &GarchSpec, n: usize, rng: RngSpec) -> Result<(TimeSeries, TimeSeries)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::spec("n must be >= 1"));
    }
    let burn = 500;
    let z = normals(&mut rng.rng(), burn + n);
    let mut s2 = spec.unconditional_variance();
    let mut y = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for (t, zt) in z.iter().enumerate() {
        let e = s2.sqrt() * zt;
        if t >= burn {
            y.push(spec.mu + e);
            v.push(s2);
        }
        s2 = spec.omega + spec.alpha * e * e + spec.beta * s2;
    }
    Ok((TimeSeries::new(y)?, TimeSeries::new(v)?))
}

/// Mean of `log sigma2_t + eps_t^2 / sigma2_t`.
fn mean_objective(eps: &[f64], omega: f64, alpha: f64, beta: f64, sigma2_0: f64, buf: &mut Vec<f64>) -> f64 {
    filter_into(eps, omega, alpha, beta, sigma2_0, buf);
    let total: f64 = eps.iter().zip(buf.iter()).map(|(e, s)| s.ln() + e * e / s).sum();
    total / eps.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmleOptions {
    pub max_iter: u64,
    /// Simplex cost spread (per observation) at which the search stops.
    pub tol: f64,
    /// Fit an AR(1) mean by OLS first and estimate on its residuals.
    pub ar1_mean: bool,
}

impl Default for QmleOptions {
    fn default() -> Self {
        QmleOptions { max_iter: 2000, tol: 1e-10, ar1_mean: false }
    }
}

#[derive(Debug, Clone)]
pub struct QmleResult {
    /// `mu` is the sample mean (or AR(1) intercept-implied mean).
    pub spec: GarchSpec,
    /// `sum_t (log sigma2_t + eps_t^2 / sigma2_t)` at the estimate.
    pub neg_loglik: f64,
    pub converged: bool,
    pub iterations: u64,
    /// Best per-observation objective after each iteration.
    pub cost_path: Vec<f64>,
    /// AR(1) mean coefficient when `ar1_mean` was requested.
    pub ar1_coef: Option<f64>,
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Unconstrained `(log omega, u, v)` to `(omega, alpha, beta)` with
/// `alpha + beta = cap * logistic(u)` and `alpha = (alpha + beta) logistic(v)`.
fn to_params(theta: &[f64]) -> (f64, f64, f64) {
    let a = PERSISTENCE_CAP * logistic(theta[1]);
    let alpha = a * logistic(theta[2]);
    (theta[0].exp(), alpha, a - alpha)
}

fn from_params(omega: f64, alpha: f64, beta: f64) -> Vec<f64> {
    let alpha = alpha.max(1e-4);
    let beta = beta.max(1e-4);
    let a = (alpha + beta).min(0.999 * PERSISTENCE_CAP);
    vec![omega.ln(), logit(a / PERSISTENCE_CAP), logit((alpha / (alpha + beta)).clamp(1e-4, 1.0 - 1e-4))]
}

struct Objective<'a> {
    eps: &'a [f64],
    sigma2_0: f64,
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, theta: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        let (o, a, b) = to_params(theta);
        let mut buf = Vec::with_capacity(self.eps.len());
        let v = mean_objective(self.eps, o, a, b, self.sigma2_0, &mut buf);
        Ok(if v.is_finite() { v } else { f64::MAX })
    }
}

#[derive(Clone, Default)]
struct BestCostLog(Arc<Mutex<Vec<f64>>>);

impl<I: State<Float = f64>> Observe<I> for BestCostLog {
    fn observe_iter(&mut self, state: &I, _kv: &KV) -> std::result::Result<(), ArgminError> {
        self.0.lock().expect("cost log lock").push(state.get_best_cost());
        Ok(())
    }
}

/// Gaussian QMLE of GARCH(1,1) by Nelder-Mead on a reparametrization that
/// enforces `omega > 0`, `alpha, beta >= 0`, `alpha + beta <= 1 - 1e-6`.
/// `eps_t = y_t - mean(y)` (or AR(1) residuals) and `sigma2_0` is the
/// sample variance of `eps`. Non-convergence is reported, not an error.
pub fn garch_qmle(y: &TimeSeries, init: &GarchSpec, opts: &QmleOptions) -> Result<QmleResult> {
    init.validate()?;
    if y.len() < 50 {
        return Err(Error::Size(format!("GARCH QMLE needs n >= 50, got {}", y.len())));
    }
    let (eps, mu, ar1_coef) = if opts.ar1_mean {
        let fit = ols_ar(y, 1, Deterministic::Const)?;
        let (phi, c) = (fit.coeffs[0], fit.coeffs[1]);
        (fit.residuals.into_vec(), c / (1.0 - phi), Some(phi))
    } else {
        let m = y.mean();
        (y.values().iter().map(|v| v - m).collect::<Vec<_>>(), m, None)
    };
    let n = eps.len() as f64;
    let em = eps.iter().sum::<f64>() / n;
    let sigma2_0 = eps.iter().map(|e| (e - em) * (e - em)).sum::<f64>() / n;
    if !(sigma2_0 > 0.0) {
        return Err(Error::Degenerate("series has zero variance".into()));
    }
    let start = from_params(init.omega, init.alpha, init.beta);
    let steps = [0.3, 0.5, 0.5];
    let mut simplex = vec![start.clone()];
    for (i, s) in steps.iter().enumerate() {
        let mut p = start.clone();
        p[i] += s;
        simplex.push(p);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.tol)
        .map_err(|e| Error::spec(e.to_string()))?;
    let log = BestCostLog::default();
    let problem = Objective { eps: &eps, sigma2_0 };
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(opts.max_iter))
        .add_observer(log.clone(), ObserverMode::Always)
        .run()
        .map_err(|e| Error::Degenerate(format!("optimizer failed: {e}")))?;
    let state = res.state();
    let theta = state.get_best_param().cloned().unwrap_or(start);
    let (omega, alpha, beta) = to_params(&theta);
    let converged = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
    );
    let cost_path = log.0.lock().expect("cost log lock").clone();
    Ok(QmleResult {
        spec: GarchSpec { omega, alpha, beta, mu },
        neg_loglik: state.get_best_cost() * n,
        converged,
        iterations: state.get_iter(),
        cost_path,
        ar1_coef,
    })
}

/// Largest absolute error over `(omega, alpha, beta)`.
pub fn max_param_error(est: &GarchSpec, truth: &GarchSpec) -> f64 {
    est.max_abs_diff(truth)
}
