//! Registry of simulation experiments. Each entry reads its `dgp.*` and
//! `method.*` keys once, precomputes whatever is shared across
//! replications, and returns a closure mapping a replication's random
//! stream to one row of statistics.

use nalgebra::{DMatrix, DVector};

use super::config::{ExperimentConfig, Params};
use super::forecast::{nested_forecast_test, recursive_forecasts};
use crate::bootstrap::{bootstrap_pvalue, residual_unitroot_bootstrap, BlockSpec, Tail};
use crate::breaks::{nbb_sup_draws, split_wald, sup_wald};
use crate::coint::{fmols, simulate_cointegration};
use crate::error::{Error, Result};
use crate::garch::{garch_filter, garch_qmle, max_param_error, simulate_garch, GarchSpec, QmleOptions};
use crate::linalg::Ols;
use crate::lrv::{default_bandwidth, hac_lrv_scalar, KernelFamily, KernelSpec};
use crate::netdep::{graph_distance, simulate_graph_ma_dist, Graph, NetworkHacPlan};
use crate::predreg::{ivx_estimate, IvxSpec};
use crate::randmat::{esd_ks_distance, sample_cov_spectrum};
use crate::series::{normals, LurSpec, MultiSeries, RngSpec, SystemSpec, TimeSeries};
use crate::stats;
use crate::unitroot::{adf_default_lags, adf_test, df_limit_draws, phillips_z, Ar1Regression, Deterministic};

/// Names and one-line descriptions of the registered experiments.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    ("ar1-clt", "OLS in a stationary AR(1): sqrt(n)(rho_hat - phi)"),
    ("lrv-ar1", "kernel long-run variance of an AR(1)"),
    ("pp-size", "Phillips Z_alpha and uncorrected T(a - 1) under a unit root with MA(1) errors"),
    ("adf-power", "augmented Dickey-Fuller t-test rejection under local-to-unity roots"),
    ("fmols-size", "FM-OLS and OLS slope t-tests in an endogenous cointegrating regression"),
    ("ivx-null", "IVX Wald test of no predictability"),
    ("supwald-null", "sup-Wald break statistic in a predictive regression"),
    ("nbb-sup", "supremum of the normalized Brownian bridge (n = grid points)"),
    ("wald-fixed", "split-sample Wald at a fixed break fraction"),
    ("nethac-coverage", "network HAC confidence intervals for a graph moving average (n = nodes)"),
    ("unitroot-bootstrap", "residual block bootstrap of T(rho - 1) under a unit root"),
    ("garch-recovery", "GARCH(1,1) QMLE parameter recovery"),
    ("mp-edges", "extreme eigenvalues of a sample covariance matrix"),
    ("nested-forecast", "nested-model out-of-sample forecast comparison"),
    ("forecast-mse", "recursive one-step forecast MSE in a persistent predictive system"),
];

pub(crate) type RepFn = Box<dyn Fn(RngSpec) -> Result<Vec<f64>> + Send + Sync>;

pub(crate) struct Prepared {
    pub columns: Vec<&'static str>,
    pub run: RepFn,
}

/// Seed for tables shared by all replications, disjoint from the
/// replication streams.
fn aux_seed(seed: RngSpec) -> RngSpec {
    RngSpec::new(seed.seed ^ 0x5bd1_e995_9e37_79b9, seed.stream)
}

/// Stream family for resampling nested inside replication `rng`.
fn inner_seed(rng: RngSpec) -> RngSpec {
    RngSpec::new(rng.seed ^ 0xc2b2_ae3d_27d4_eb4f, rng.stream.wrapping_mul(1 << 24))
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn kernel(m: &mut Params, n: usize) -> Result<KernelSpec> {
    let family = m.parsed("kernel", KernelFamily::Bartlett)?;
    let bw = m.opt_f64("bandwidth")?.unwrap_or_else(|| default_bandwidth(n));
    m.wrap("bandwidth", KernelSpec::new(family, bw))
}

fn stationary_ar1(phi: f64, n: usize, rng: RngSpec) -> Vec<f64> {
    let e = normals(&mut rng.rng(), n + 1);
    let mut x = e[0] / (1.0 - phi * phi).sqrt();
    e[1..]
        .iter()
        .map(|v| {
            x = phi * x + v;
            x
        })
        .collect()
}

fn check_phi(d: &Params, phi: f64) -> Result<()> {
    if phi.abs() >= 1.0 {
        return d.wrap("phi", Err(Error::spec("need |phi| < 1")));
    }
    Ok(())
}

fn lur(d: &mut Params, c: f64, gamma: f64) -> Result<LurSpec> {
    let c = d.f64("c", c)?;
    let g = d.f64("gamma", gamma)?;
    d.wrap("gamma", LurSpec::new(c, g))
}

fn trim(m: &mut Params) -> Result<(f64, f64)> {
    Ok((m.f64("trim_lo", 0.15)?, m.f64("trim_hi", 0.85)?))
}

/// Build the replication closure for experiment `cfg.experiment` at size `n`.
pub(crate) fn prepare(cfg: &ExperimentConfig, n: usize) -> Result<Prepared> {
    let mut d = Params::new("dgp", &cfg.dgp);
    let mut m = Params::new("method", &cfg.method);
    let level = cfg.level;
    let prepared = match cfg.experiment.as_str() {
        "ar1-clt" => {
            let phi = d.f64("phi", 0.5)?;
            check_phi(&d, phi)?;
            Prepared {
                columns: vec!["rho_hat", "z"],
                run: Box::new(move |rng| {
                    let x = stationary_ar1(phi, n, rng);
                    let (mut sxy, mut sxx) = (0.0, 0.0);
                    for w in x.windows(2) {
                        sxy += w[0] * w[1];
                        sxx += w[0] * w[0];
                    }
                    let r = sxy / sxx;
                    Ok(vec![r, (n as f64).sqrt() * (r - phi)])
                }),
            }
        }
        "lrv-ar1" => {
            let phi = d.f64("phi", 0.5)?;
            check_phi(&d, phi)?;
            let k = kernel(&mut m, n)?;
            let truth = 1.0 / (1.0 - phi).powi(2);
            Prepared {
                columns: vec!["omega_hat", "rel_error"],
                run: Box::new(move |rng| {
                    let x = stationary_ar1(phi, n, rng);
                    let w = hac_lrv_scalar(&x, &k, true)?;
                    Ok(vec![w, (w - truth) / truth])
                }),
            }
        }
        "pp-size" => {
            let theta = d.f64("theta", 0.5)?;
            let k = kernel(&mut m, n)?;
            let cv_reps = m.usize("cv_reps", 20_000)?;
            let draws = df_limit_draws(n, Deterministic::None, cv_reps, aux_seed(cfg.seed))?;
            let coef: Vec<f64> = draws.iter().map(|v| v.0).collect();
            let cv = stats::quantile(&coef, level);
            Prepared {
                columns: vec!["z_alpha", "coef_stat", "reject", "reject_uncorrected"],
                run: Box::new(move |rng| {
                    let e = normals(&mut rng.rng(), n + 1);
                    let mut level = 0.0;
                    let y: Vec<f64> = (1..=n)
                        .map(|t| {
                            level += e[t] + theta * e[t - 1];
                            level
                        })
                        .collect();
                    let z = phillips_z(&TimeSeries::new(y.clone())?, &k, Deterministic::None)?;
                    let coef = Ar1Regression::fit(&y, Deterministic::None)?.coef_stat();
                    Ok(vec![z.z_alpha, coef, flag(z.z_alpha < cv), flag(coef < cv)])
                }),
            }
        }
        "adf-power" => {
            let spec = lur(&mut d, 0.0, 1.0)?;
            let det = m.parsed("deterministic", Deterministic::Const)?;
            if det == Deterministic::Trend {
                return Err(Error::config("method.deterministic", "critical values need none or const"));
            }
            let lags = m.usize("lags", adf_default_lags(n))?;
            let cv_reps = m.usize("cv_reps", 20_000)?;
            let draws = df_limit_draws(n, det, cv_reps, aux_seed(cfg.seed))?;
            let t: Vec<f64> = draws.iter().map(|v| v.1).collect();
            let cv = stats::quantile(&t, level);
            Prepared {
                columns: vec!["t_stat", "reject"],
                run: Box::new(move |rng| {
                    let e = normals(&mut rng.rng(), n);
                    let rho = spec.rho(n);
                    let mut x = 0.0;
                    let y: Vec<f64> = e
                        .iter()
                        .map(|v| {
                            x = rho * x + v;
                            x
                        })
                        .collect();
                    let r = adf_test(&TimeSeries::new(y)?, lags, det)?;
                    Ok(vec![r.t_stat, flag(r.t_stat < cv)])
                }),
            }
        }
        "fmols-size" => {
            let corr = d.f64("corr", 0.9)?;
            let beta = d.f64("beta", 1.0)?;
            let mu = d.f64("mu", 0.0)?;
            let k = kernel(&mut m, n)?;
            let z = stats::normal_quantile(1.0 - level / 2.0);
            d.wrap("corr", simulate_cointegration(mu, &[beta], corr, 2, RngSpec::default()).map(|_| ()))?;
            Prepared {
                columns: vec!["t_fm", "t_ols", "reject_fm", "reject_ols"],
                run: Box::new(move |rng| {
                    let (y, x) = simulate_cointegration(mu, &[beta], corr, n, rng)?;
                    let fm = fmols(&y, &x, &k)?;
                    let t_fm = fm.t_ratio(1, beta);
                    let design = DMatrix::from_fn(n, 2, |t, j| if j == 0 { 1.0 } else { x.matrix()[(t, 0)] });
                    let ols = Ols::fit(&design, &DVector::from_column_slice(y.values()))?;
                    let t_ols = (ols.coef[1] - beta) / ols.se(1);
                    Ok(vec![t_fm, t_ols, flag(t_fm.abs() > z), flag(t_ols.abs() > z)])
                }),
            }
        }
        "ivx-null" => {
            let spec = lur(&mut d, 0.0, 1.0)?;
            let corr = d.f64("corr", -0.5)?;
            let beta = d.f64("beta", 0.0)?;
            let (c_z, beta_z) = (m.f64("c_z", -1.0)?, m.f64("beta_z", 0.95)?);
            let ivx = m.wrap("c_z", IvxSpec::new(c_z, beta_z))?;
            let demean = m.bool("demean", true)?;
            let sys = SystemSpec::scalar(beta, spec, corr);
            d.wrap("corr", crate::series::simulate_predictive_system(&sys, 2, RngSpec::default()).map(|_| ()))?;
            Prepared {
                columns: vec!["wald", "pvalue", "reject"],
                run: Box::new(move |rng| {
                    let (y, x) = crate::series::simulate_predictive_system(&sys, n, rng)?;
                    let r = ivx_estimate(&y, &x, &ivx, demean)?;
                    Ok(vec![r.wald, r.pvalue, flag(r.pvalue < level)])
                }),
            }
        }
        "supwald-null" | "wald-fixed" => {
            let spec = lur(&mut d, -5.0, 0.75)?;
            let corr = d.f64("corr", 0.0)?;
            let beta = d.f64("beta", 0.0)?;
            let demean = m.bool("demean", true)?;
            let sys = SystemSpec::scalar(beta, spec, corr);
            d.wrap("corr", crate::series::simulate_predictive_system(&sys, 2, RngSpec::default()).map(|_| ()))?;
            if cfg.experiment == "supwald-null" {
                let tr = trim(&mut m)?;
                Prepared {
                    columns: vec!["sup_wald", "argmax_pi"],
                    run: Box::new(move |rng| {
                        let (y, x) = crate::series::simulate_predictive_system(&sys, n, rng)?;
                        let s = sup_wald(&y, &x, tr, demean)?;
                        Ok(vec![s.sup_stat, s.argmax_pi])
                    }),
                }
            } else {
                let pi = m.f64("pi", 0.5)?;
                if !(pi > 0.0 && pi < 1.0) {
                    return Err(Error::config("method.pi", "break fraction outside (0, 1)"));
                }
                let k = ((pi * (n - 1) as f64).round() as usize).max(1);
                let cv = stats::chi2_quantile(1.0, 1.0 - level);
                Prepared {
                    columns: vec!["wald", "reject"],
                    run: Box::new(move |rng| {
                        let (y, x) = crate::series::simulate_predictive_system(&sys, n, rng)?;
                        let w = split_wald(&y, &x, k, demean)?;
                        Ok(vec![w, flag(w > cv)])
                    }),
                }
            }
        }
        "nbb-sup" => {
            let p = m.usize("p", 1)?;
            let tr = trim(&mut m)?;
            m.wrap("trim_lo", nbb_sup_draws(p, tr, n, 0, RngSpec::default()).map(|_| ()))?;
            Prepared {
                columns: vec!["sup"],
                run: Box::new(move |rng| Ok(vec![nbb_sup_draws(p, tr, n, 1, rng)?[0]])),
            }
        }
        "nethac-coverage" => {
            let graph = d.string("graph", "cycle")?;
            let radius = d.usize("radius", 1)?;
            let weights = d.list("weights", &[1.0, 0.5])?;
            let g = match graph.as_str() {
                "cycle" => d.wrap("graph", Graph::cycle(n))?,
                "path" => Graph::path(n),
                "star" => Graph::star(n - 1),
                other => return Err(Error::config("dgp.graph", format!("unknown graph `{other}`"))),
            };
            let dist = graph_distance(&g);
            d.wrap("weights", simulate_graph_ma_dist(&dist, radius, &weights, RngSpec::default(), 1).map(|_| ()))?;
            let k = {
                let family = m.parsed("kernel", KernelFamily::Bartlett)?;
                let b = m.f64("bandwidth", 3.0)?;
                m.wrap("bandwidth", KernelSpec::new(family, b))?
            };
            let plan = m.wrap("kernel", NetworkHacPlan::new(&dist, &k))?;
            let naive = NetworkHacPlan::new(&dist, &KernelSpec::new(k.family, 0.5)?)?;
            let z = stats::normal_quantile(1.0 - level / 2.0);
            Prepared {
                columns: vec!["mean", "v_hat", "v_naive", "covered", "covered_naive"],
                run: Box::new(move |rng| {
                    let y = simulate_graph_ma_dist(&dist, radius, &weights, rng, 1)?;
                    let mean = y.matrix().mean();
                    let v = plan.apply(&y, true)?[(0, 0)];
                    let v0 = naive.apply(&y, true)?[(0, 0)];
                    let half = |v: f64| z * (v.max(0.0) / n as f64).sqrt();
                    Ok(vec![mean, v, v0, flag(mean.abs() <= half(v)), flag(mean.abs() <= half(v0))])
                }),
            }
        }
        "unitroot-bootstrap" => {
            let spec = lur(&mut d, 0.0, 1.0)?;
            let b = m.usize("b", 2000)?;
            let l = m.usize("block", (n as f64).cbrt().ceil() as usize)?;
            let overlap = m.bool("overlap", true)?;
            let circular = m.bool("circular", false)?;
            let block = m.wrap("block", BlockSpec::new(l, overlap, circular))?;
            Prepared {
                columns: vec!["stat", "boot_q", "pvalue", "reject"],
                run: Box::new(move |rng| {
                    let e = normals(&mut rng.rng(), n);
                    let rho = spec.rho(n);
                    let mut x = 0.0;
                    let y: Vec<f64> = e
                        .iter()
                        .map(|v| {
                            x = rho * x + v;
                            x
                        })
                        .collect();
                    let stat = Ar1Regression::fit(&y, Deterministic::None)?.coef_stat();
                    let reps = residual_unitroot_bootstrap(&TimeSeries::new(y)?, &block, b, inner_seed(rng))?;
                    let p = bootstrap_pvalue(stat, &reps, Tail::Left)?;
                    Ok(vec![stat, reps.quantile(level), p, flag(p <= level)])
                }),
            }
        }
        "garch-recovery" => {
            let (omega, alpha) = (d.f64("omega", 0.1)?, d.f64("alpha", 0.1)?);
            let (beta, mu) = (d.f64("beta", 0.8)?, d.f64("mu", 0.0)?);
            let truth = d.wrap("omega", GarchSpec::new(omega, alpha, beta, mu))?;
            let opts = QmleOptions {
                max_iter: m.usize("max_iter", 2000)? as u64,
                tol: m.f64("tol", 1e-10)?,
                ar1_mean: false,
            };
            let a0 = m.f64("init_alpha", 0.05)?;
            let b0 = m.f64("init_beta", 0.9)?;
            if !(a0 >= 0.0 && b0 >= 0.0 && a0 + b0 < 1.0) {
                return Err(Error::config("method.init_alpha", "initial alpha + beta must lie in [0, 1)"));
            }
            let target = truth.unconditional_variance();
            Prepared {
                columns: vec!["omega_hat", "alpha_hat", "beta_hat", "max_err", "filter_mean", "filter_rel_err", "converged"],
                run: Box::new(move |rng| {
                    let (y, _) = simulate_garch(&truth, n, rng)?;
                    let var = stats::variance(y.values());
                    let init = GarchSpec::new(var * (1.0 - a0 - b0), a0, b0, y.mean())?;
                    let fit = garch_qmle(&y, &init, &opts)?;
                    let eps = y.shifted(-fit.spec.mu);
                    let s2 = garch_filter(&eps, &fit.spec, var)?;
                    let fm = s2.mean();
                    Ok(vec![
                        fit.spec.omega,
                        fit.spec.alpha,
                        fit.spec.beta,
                        max_param_error(&fit.spec, &truth),
                        fm,
                        (fm - target) / target,
                        flag(fit.converged),
                    ])
                }),
            }
        }
        "mp-edges" => {
            let gamma = d.f64("gamma", 0.25)?;
            let allow_wide = m.bool("allow_wide", false)?;
            let p = (gamma * n as f64).round() as usize;
            if p == 0 {
                return Err(Error::config("dgp.gamma", "gives an empty dimension"));
            }
            let ratio = p as f64 / n as f64;
            let ks = ratio <= 1.0;
            Prepared {
                columns: vec!["lambda_min", "lambda_max", "trace_rel_err", "esd_ks"],
                run: Box::new(move |rng| {
                    let s = sample_cov_spectrum(n, p, rng, allow_wide)?;
                    let sum: f64 = s.eigenvalues.iter().sum();
                    let ks = if ks { esd_ks_distance(&s.eigenvalues, ratio)? } else { f64::NAN };
                    Ok(vec![s.lambda_min, s.lambda_max, (sum - s.trace).abs() / s.trace.abs(), ks])
                }),
            }
        }
        "nested-forecast" => {
            let beta2 = d.f64("beta2", 0.5)?;
            let phi = d.f64("phi", 0.5)?;
            check_phi(&d, phi)?;
            let k0 = m.usize("k0", n / 2)?;
            Prepared {
                columns: vec!["stat", "positive"],
                run: Box::new(move |rng| {
                    let x2 = stationary_ar1(phi, n, rng);
                    let u = normals(&mut inner_seed(rng).rng(), n);
                    let y: Vec<f64> = (0..n).map(|t| if t == 0 { u[0] } else { beta2 * x2[t - 1] + u[t] }).collect();
                    let x1 = MultiSeries::new(DMatrix::from_element(n, 1, 1.0))?;
                    let x2 = TimeSeries::new(x2)?.to_multi();
                    let r = nested_forecast_test(&TimeSeries::new(y)?, &x1, &x2, k0)?;
                    Ok(vec![r.stat, flag(r.stat > 0.0)])
                }),
            }
        }
        "forecast-mse" => {
            let c = d.list("c", &[-0.5, -0.5, -0.5])?;
            let dim = c.len();
            let gamma = broadcast(&mut d, "gamma", 0.0, dim)?;
            let beta = broadcast(&mut d, "beta", 0.5, dim)?;
            let phi = d.list("phi", &[0.28, 0.32, -0.14])?;
            if phi.len() != dim {
                return Err(Error::config("dgp.phi", format!("need {dim} values")));
            }
            let lurs = c
                .iter()
                .zip(&gamma)
                .map(|(c, g)| d.wrap("c", LurSpec::new(*c, *g)))
                .collect::<Result<Vec<_>>>()?;
            let sys = SystemSpec {
                beta: DVector::from_vec(beta),
                intercept: 0.0,
                lur: lurs,
                sigma_ee: DMatrix::identity(dim + 1, dim + 1),
                v_filter: Some(phi),
            };
            d.wrap("phi", crate::series::simulate_predictive_system(&sys, 2, RngSpec::default()).map(|_| ()))?;
            let k0 = m.usize("k0", n / 2)?;
            let intercept = m.bool("intercept", true)?;
            if k0 < dim + 3 || k0 + 2 > n {
                return Err(Error::config("method.k0", "outside [dims + 2, n - 2]"));
            }
            Prepared {
                columns: vec!["mse"],
                run: Box::new(move |rng| {
                    let (y, x) = crate::series::simulate_predictive_system(&sys, n, rng)?;
                    let off = usize::from(intercept);
                    let design = DMatrix::from_fn(n, dim + off, |t, j| if j < off { 1.0 } else { x.matrix()[(t, j - off)] });
                    let (start, f) = recursive_forecasts(y.values(), &design, k0)?;
                    let err: f64 = f.iter().enumerate().map(|(i, v)| (y.values()[start + i + 1] - v).powi(2)).sum();
                    Ok(vec![err / f.len() as f64])
                }),
            }
        }
        other => return Err(Error::config("experiment", format!("unknown experiment `{other}`"))),
    };
    d.finish()?;
    m.finish()?;
    Ok(prepared)
}

/// A list of `dim` values, or one value repeated.
fn broadcast(d: &mut Params, k: &'static str, default: f64, dim: usize) -> Result<Vec<f64>> {
    let v = d.list(k, &[default])?;
    match v.len() {
        1 => Ok(vec![v[0]; dim]),
        l if l == dim => Ok(v),
        _ => Err(Error::config(format!("dgp.{k}"), format!("need 1 or {dim} values"))),
    }
}
