use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use nonstat::bootstrap::{
    block_bootstrap, residual_unitroot_bootstrap, sieve_bootstrap, stationary_bootstrap, wild_bootstrap, BlockSpec,
    BootReplicates, Multiplier,
};
use nonstat::breaks::{lm_nyblom, me_monitor, sup_wald};
use nonstat::coint::{fk_break_test, fmols, shin_vn, simulate_cointegration, BreakPoint, ShinVariance};
use nonstat::garch::{garch_qmle, simulate_garch, GarchSpec, QmleOptions};
use nonstat::io::{write_columns, write_multi, write_pairs, Table};
use nonstat::lrv::{default_bandwidth, hac_lrv, KernelFamily, KernelSpec};
use nonstat::mc::{parse_grid, run_experiment, size_power_grid, ExperimentConfig, EXPERIMENTS};
use nonstat::netdep::{denseness_stats, network_hac, simulate_graph_ma, Graph};
use nonstat::predreg::{ivx_estimate, IvxSpec};
use nonstat::randmat::{mp_support, sample_cov_spectrum, spectrum_of};
use nonstat::series::{simulate_lur_ar, simulate_predictive_system, Innovations, LinearProcessSpec, LurSpec, SystemSpec};
use nonstat::unitroot::{adf_default_lags, adf_test, df_limit_mc, phillips_z, Deterministic};
use nonstat::{Error, Result, RngSpec};

#[derive(Parser)]
#[command(name = "nonstat", version, about = "Simulation, estimation and testing for nonstationary and network-dependent data")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Base seed; replication r uses stream `stream + r`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Replications (Monte Carlo) or bootstrap draws.
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; all available cores by default.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Nominal test level.
    #[arg(long, global = true, default_value_t = 0.05)]
    level: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a data-generating process to CSV.
    Simulate(SimulateArgs),
    /// Fit an estimator to CSV data.
    Estimate(EstimateArgs),
    /// Run a hypothesis test on CSV data.
    Test(TestArgs),
    /// Resample a CSV series and report bootstrap replicates.
    Bootstrap(BootstrapArgs),
    /// Network statistics and network HAC for an edge list.
    Netdep(NetdepArgs),
    /// Sample-covariance eigenvalues and the Marchenko-Pastur support.
    Spectrum(SpectrumArgs),
    /// Config-driven Monte Carlo experiments.
    Mc {
        #[command(subcommand)]
        cmd: McCmd,
    },
}

#[derive(Subcommand)]
enum McCmd {
    /// Run one experiment config.
    Run { config: PathBuf },
    /// Run a `---`-separated grid of configs into one table.
    Grid { config: PathBuf },
    /// List registered experiments.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dgp {
    /// `x_t = rho_n x_{t-1} + e_t` with `rho_n = 1 + c / n^gamma`.
    Lur,
    /// Unit root driven by MA(1) errors `e_t + theta e_{t-1}`.
    UnitRootMa,
    /// Predictive regression `y_t = beta x_{t-1} + u_t` with an LUR regressor.
    Predictive,
    /// Cointegrated pair `y_t = mu + beta x_t + u_t`.
    Coint,
    Garch,
    /// Graph moving average over `--graph`.
    GraphMa,
}

#[derive(Args)]
struct SimulateArgs {
    dgp: Dgp,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    corr: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.1)]
    omega: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long = "garch-beta", default_value_t = 0.8)]
    garch_beta: f64,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    radius: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,0.5")]
    weights: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    /// Kernel long-run covariance of the selected columns.
    Hac,
    Fmols,
    Ivx,
    Garch,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, default_value = "bartlett")]
    kernel: String,
    /// Defaults to `ceil(1.2 n^(1/3))`.
    #[arg(long)]
    bandwidth: Option<f64>,
}

impl KernelArgs {
    fn spec(&self, n: usize) -> Result<KernelSpec> {
        let family: KernelFamily = self.kernel.parse()?;
        KernelSpec::new(family, self.bandwidth.unwrap_or_else(|| default_bandwidth(n)))
    }
}

#[derive(Args)]
struct DataArgs {
    input: PathBuf,
    /// Dependent column (first column by default).
    #[arg(long)]
    y: Option<String>,
    /// Regressor columns.
    #[arg(long, value_delimiter = ',')]
    x: Vec<String>,
}

impl DataArgs {
    fn load(&self) -> Result<Table> {
        Table::from_path(&self.input)
    }
}

#[derive(Args)]
struct EstimateArgs {
    method: Estimator,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    c_z: f64,
    #[arg(long, default_value_t = 0.95)]
    beta_z: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestKind {
    Adf,
    Pp,
    Shin,
    Fk,
    SupWald,
    Nyblom,
    Me,
    Ivx,
}

#[derive(Args)]
struct TestArgs {
    kind: TestKind,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value = "const")]
    deterministic: String,
    #[arg(long)]
    lags: Option<usize>,
    #[arg(long, default_value_t = 0.15)]
    trim_lo: f64,
    #[arg(long, default_value_t = 0.85)]
    trim_hi: f64,
    /// Monitoring window as a fraction of the historical sample.
    #[arg(long, default_value_t = 0.25)]
    window: f64,
    /// Historical sample length for monitoring (half the data by default).
    #[arg(long)]
    n_hist: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Block,
    Stationary,
    Sieve,
    Wild,
    Unitroot,
}

#[derive(Args)]
struct BootstrapArgs {
    scheme: Scheme,
    #[command(flatten)]
    data: DataArgs,
    /// Block length (mean length for the stationary bootstrap).
    #[arg(long, default_value_t = 10)]
    block: usize,
    #[arg(long)]
    circular: bool,
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, default_value = "rademacher")]
    multiplier: String,
}

#[derive(Args)]
struct NetdepArgs {
    /// Edge list: `n=<nodes>` then one `i j` pair per line, 1-based.
    graph: PathBuf,
    /// Node data for the network HAC; statistics only when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    bandwidth: f64,
    #[arg(long, default_value_t = 2)]
    s: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
}

#[derive(Args)]
struct SpectrumArgs {
    /// `p x n` data matrix with one variable per column of the CSV
    /// transposed; simulated Gaussian data when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    p: usize,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn simulate(g: &Global, a: &SimulateArgs) -> Result<()> {
    let rng = RngSpec::new(g.seed, 0);
    let mut w = sink(&g.out)?;
    match a.dgp {
        Dgp::Lur => {
            let wn = LinearProcessSpec::white_noise(1.0)?;
            let x = simulate_lur_ar(&LurSpec::new(a.c, a.gamma)?, Innovations::Linear(&wn), 0.0, a.n, rng)?;
            write_columns(&mut w, "series", &["x"], &[x.values()])?;
        }
        Dgp::UnitRootMa => {
            let ma = LinearProcessSpec::new(vec![1.0, a.theta], 1.0)?;
            let x = simulate_lur_ar(&LurSpec::unit_root(), Innovations::Linear(&ma), 0.0, a.n, rng)?;
            write_columns(&mut w, "series", &["x"], &[x.values()])?;
        }
        Dgp::Predictive => {
            let sys = SystemSpec::scalar(a.beta, LurSpec::new(a.c, a.gamma)?, a.corr);
            let (y, x) = simulate_predictive_system(&sys, a.n, rng)?;
            write_columns(&mut w, "predictive", &["y", "x"], &[y.values(), x.column(0).values()])?;
        }
        Dgp::Coint => {
            let (y, x) = simulate_cointegration(0.0, &[a.beta], a.corr, a.n, rng)?;
            write_columns(&mut w, "coint", &["y", "x"], &[y.values(), x.column(0).values()])?;
        }
        Dgp::Garch => {
            let spec = GarchSpec::new(a.omega, a.alpha, a.garch_beta, 0.0)?;
            let (y, s2) = simulate_garch(&spec, a.n, rng)?;
            write_columns(&mut w, "garch", &["y", "sigma2"], &[y.values(), s2.values()])?;
        }
        Dgp::GraphMa => {
            let path = a.graph.as_ref().ok_or_else(|| Error::InvalidSpec("graph-ma needs --graph".into()))?;
            let g = Graph::parse_edge_list(&std::fs::read_to_string(path)?)?;
            let y = simulate_graph_ma(&g, a.radius, &a.weights, rng, 1)?;
            write_multi(&mut w, "graph-ma", &["y"], &y)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn regression_data(d: &DataArgs) -> Result<(nonstat::TimeSeries, nonstat::MultiSeries)> {
    let t = d.load()?;
    let yname = d.y.clone().unwrap_or_else(|| t.names[0].clone());
    let xs: Vec<String> = if d.x.is_empty() {
        t.names.iter().filter(|n| **n != yname).cloned().collect()
    } else {
        d.x.clone()
    };
    if xs.is_empty() {
        return Err(Error::InvalidSpec("no regressor columns".into()));
    }
    Ok((t.series(Some(&yname))?, t.multi(&xs)?))
}

fn estimate(g: &Global, a: &EstimateArgs) -> Result<()> {
    let mut w = sink(&g.out)?;
    match a.method {
        Estimator::Hac => {
            let t = a.data.load()?;
            let m = t.multi(&a.data.x)?;
            let est = hac_lrv(&m, &a.kernel.spec(m.nrows())?, true)?;
            let p = m.ncols();
            let flat: Vec<f64> = (0..p * p).map(|k| est.omega[(k / p, k % p)]).collect();
            let rows: Vec<f64> = (0..p * p).map(|k| (k / p) as f64).collect();
            let cols: Vec<f64> = (0..p * p).map(|k| (k % p) as f64).collect();
            write_columns(&mut w, "lrv", &["row", "col", "omega"], &[&rows, &cols, &flat])?;
        }
        Estimator::Fmols => {
            let (y, x) = regression_data(&a.data)?;
            let r = fmols(&y, &x, &a.kernel.spec(y.len())?)?;
            let se: Vec<f64> = (0..r.beta_plus.len()).map(|i| r.se(i)).collect();
            write_columns(&mut w, "fmols", &["beta_plus", "se", "beta_ols"], &[r.beta_plus.as_slice(), &se, r.beta_ols.as_slice()])?;
        }
        Estimator::Ivx => {
            let (y, x) = regression_data(&a.data)?;
            let r = ivx_estimate(&y, &x, &IvxSpec::new(a.c_z, a.beta_z)?, true)?;
            let se: Vec<f64> = (0..r.beta_ivx.len()).map(|i| r.cov[(i, i)].sqrt()).collect();
            write_columns(&mut w, "ivx", &["beta_ivx", "se"], &[r.beta_ivx.as_slice(), &se])?;
        }
        Estimator::Garch => {
            let t = a.data.load()?;
            let y = t.series(a.data.y.as_deref())?;
            let var = nonstat::stats::variance(y.values());
            let init = GarchSpec::new(0.05 * var, 0.05, 0.9, y.mean())?;
            let r = garch_qmle(&y, &init, &QmleOptions::default())?;
            write_pairs(
                &mut w,
                "garch-qmle",
                &[
                    ("omega", r.spec.omega),
                    ("alpha", r.spec.alpha),
                    ("beta", r.spec.beta),
                    ("mu", r.spec.mu),
                    ("neg_loglik", r.neg_loglik),
                    ("converged", f64::from(u8::from(r.converged))),
                ],
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn test(g: &Global, a: &TestArgs) -> Result<()> {
    let mut w = sink(&g.out)?;
    let rng = RngSpec::new(g.seed, 0);
    let cv_reps = g.reps.unwrap_or(20_000);
    let trim = (a.trim_lo, a.trim_hi);
    match a.kind {
        TestKind::Adf | TestKind::Pp => {
            let t = a.data.load()?;
            let y = t.series(a.data.y.as_deref())?;
            let det: Deterministic = a.deterministic.parse()?;
            let (r, crit) = if matches!(a.kind, TestKind::Adf) {
                let r = adf_test(&y, a.lags.unwrap_or_else(|| adf_default_lags(y.len())), det)?;
                let cv = df_limit_mc(y.len(), det, cv_reps, rng)?.tstat;
                (r, cv)
            } else {
                let r = phillips_z(&y, &a.kernel.spec(y.len())?, det)?;
                let cv = df_limit_mc(y.len(), det, cv_reps, rng)?.coef;
                (r, cv)
            };
            let stat = if matches!(a.kind, TestKind::Adf) { r.t_stat } else { r.z_alpha };
            let crit_at = crit.get(g.level).ok_or_else(|| Error::Domain(format!("level {} is not tabulated", g.level)))?;
            write_pairs(
                &mut w,
                "unitroot",
                &[("rho_hat", r.rho_hat), ("stat", stat), ("z_t", r.z_t), ("critical", crit_at), ("reject", f64::from(u8::from(stat < crit_at)))],
            )?;
        }
        TestKind::Shin => {
            let (y, x) = regression_data(&a.data)?;
            let v = shin_vn(&y, &x, &a.kernel.spec(y.len())?, ShinVariance::Kernel)?;
            write_pairs(&mut w, "shin", &[("v_n", v)])?;
        }
        TestKind::Fk => {
            let (y, x) = regression_data(&a.data)?;
            let r = fk_break_test(&y, &x, &a.kernel.spec(y.len())?, BreakPoint::Trim(a.trim_lo, a.trim_hi))?;
            write_pairs(&mut w, "fk", &[("sup_f", r.stat), ("argmax_k", r.argmax_k as f64), ("df", r.df as f64)])?;
        }
        TestKind::SupWald => {
            let (y, x) = regression_data(&a.data)?;
            let d = x.ncols();
            let s = sup_wald(&y, &x, trim, true)?.with_critical_values(d, trim, cv_reps, rng)?;
            let crit = s.critical_values.as_ref().and_then(|t| t.get(1.0 - g.level)).unwrap_or(f64::NAN);
            write_pairs(
                &mut w,
                "sup-wald",
                &[("sup_wald", s.sup_stat), ("argmax_pi", s.argmax_pi), ("critical", crit), ("reject", f64::from(u8::from(s.sup_stat > crit)))],
            )?;
        }
        TestKind::Nyblom => {
            let (y, x) = regression_data(&a.data)?;
            let r = lm_nyblom(&y, &x)?;
            write_pairs(&mut w, "nyblom", &[("lm", r.lm), ("lm1", r.lm1), ("lm2", r.lm2)])?;
        }
        TestKind::Me => {
            let (y, x) = regression_data(&a.data)?;
            let n_hist = a.n_hist.unwrap_or(y.len() / 2);
            let r = me_monitor(&y, &x, a.window, n_hist)?;
            let k: Vec<f64> = r.path.iter().map(|p| p.0 as f64).collect();
            let s: Vec<f64> = r.path.iter().map(|p| p.1).collect();
            write_columns(&mut w, "me-monitor", &["k", "stat"], &[&k, &s])?;
        }
        TestKind::Ivx => {
            let (y, x) = regression_data(&a.data)?;
            let r = ivx_estimate(&y, &x, &IvxSpec::default(), true)?;
            write_pairs(&mut w, "ivx-wald", &[("wald", r.wald), ("pvalue", r.pvalue), ("reject", f64::from(u8::from(r.pvalue < g.level)))])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn bootstrap(g: &Global, a: &BootstrapArgs) -> Result<()> {
    let t = a.data.load()?;
    let y = t.series(a.data.y.as_deref())?;
    let b = g.reps.unwrap_or(999);
    let rng = RngSpec::new(g.seed, 0);
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let reps: BootReplicates = match a.scheme {
        Scheme::Block => block_bootstrap(&y, &BlockSpec::new(a.block, true, a.circular)?, mean, b, rng)?,
        Scheme::Stationary => stationary_bootstrap(&y, a.block as f64, mean, b, rng)?,
        Scheme::Sieve => sieve_bootstrap(&y, a.order, mean, b, rng, false)?,
        Scheme::Wild => {
            let m = y.mean();
            let centered = y.shifted(-m);
            let n = y.len() as f64;
            wild_bootstrap(&centered, a.multiplier.parse::<Multiplier>()?, |x| x.iter().sum::<f64>() / n.sqrt(), b, rng)?
        }
        Scheme::Unitroot => residual_unitroot_bootstrap(&y, &BlockSpec::new(a.block, true, false)?, b, rng)?,
    };
    if let Some(msg) = &reps.warning {
        eprintln!("warning: {msg}");
    }
    let idx: Vec<f64> = (0..reps.len()).map(|i| i as f64).collect();
    let mut w = sink(&g.out)?;
    write_columns(&mut w, "bootstrap", &["rep", "stat"], &[&idx, &reps.stats])?;
    w.flush()?;
    Ok(())
}

fn netdep(g: &Global, a: &NetdepArgs) -> Result<()> {
    let graph = Graph::parse_edge_list(&std::fs::read_to_string(&a.graph)?)?;
    let mut w = sink(&g.out)?;
    match &a.data {
        None => {
            let s = denseness_stats(&graph, a.s, a.m, a.k)?;
            write_pairs(
                &mut w,
                "netdep-stats",
                &[("delta_shell", s.delta_shell), ("delta_nm", s.delta_nm), ("c_n", s.c_n), ("best_a", s.best_a)],
            )?;
        }
        Some(path) => {
            let y = Table::from_path(path)?.multi(&[])?;
            let v = network_hac(&graph, &y, &KernelSpec::bartlett(a.bandwidth), true)?;
            let p = v.nrows();
            let flat: Vec<f64> = (0..p * p).map(|k| v[(k / p, k % p)]).collect();
            let rows: Vec<f64> = (0..p * p).map(|k| (k / p) as f64).collect();
            let cols: Vec<f64> = (0..p * p).map(|k| (k % p) as f64).collect();
            write_columns(&mut w, "network-hac", &["row", "col", "v"], &[&rows, &cols, &flat])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn spectrum(g: &Global, a: &SpectrumArgs) -> Result<()> {
    let s = match &a.input {
        Some(path) => {
            let t = Table::from_path(path)?;
            let m = t.multi(&[])?;
            let x: DMatrix<f64> = m.matrix().transpose();
            spectrum_of(&x)?
        }
        None => sample_cov_spectrum(a.n, a.p, RngSpec::new(g.seed, 0), false)?,
    };
    let mut w = sink(&g.out)?;
    if s.ratio <= 1.0 {
        let (lo, hi) = mp_support(s.ratio)?;
        writeln!(w, "# ratio={} support=[{lo}, {hi}] trace={}", s.ratio, s.trace)?;
    }
    write_columns(&mut w, "spectrum", &["eigenvalue"], &[&s.eigenvalues])?;
    w.flush()?;
    Ok(())
}

fn load_configs(path: &Path, g: &Global) -> Result<Vec<ExperimentConfig>> {
    let mut cfgs = parse_grid(&std::fs::read_to_string(path)?)?;
    for c in &mut cfgs {
        if let Some(r) = g.reps {
            c.reps = r;
        }
        if g.seed != 0 {
            c.seed.seed = g.seed;
        }
        c.level = g.level;
        if let Some(o) = &g.out {
            c.output = Some(o.clone());
        }
        c.validate()?;
    }
    Ok(cfgs)
}

fn mc(g: &Global, cmd: &McCmd) -> Result<()> {
    match cmd {
        McCmd::List => {
            let mut w = sink(&g.out)?;
            for (name, about) in EXPERIMENTS {
                writeln!(w, "{name:20} {about}")?;
            }
            w.flush()?;
        }
        McCmd::Run { config } => {
            let cfgs = load_configs(config, g)?;
            if cfgs.len() != 1 {
                return Err(Error::Config { key: "---".into(), msg: "use `mc grid` for several blocks".into() });
            }
            let out = run_experiment(&cfgs[0], g.jobs)?;
            if cfgs[0].output.is_none() {
                let mut w = sink(&None)?;
                out.write_summary(&mut w)?;
                w.flush()?;
            }
        }
        McCmd::Grid { config } => {
            let mut cfgs = load_configs(config, g)?;
            for c in &mut cfgs {
                c.output = None;
            }
            let table = size_power_grid(&cfgs, g.jobs)?;
            let mut w = sink(&g.out)?;
            table.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let res = match &cli.cmd {
        Cmd::Simulate(a) => simulate(g, a),
        Cmd::Estimate(a) => estimate(g, a),
        Cmd::Test(a) => test(g, a),
        Cmd::Bootstrap(a) => bootstrap(g, a),
        Cmd::Netdep(a) => netdep(g, a),
        Cmd::Spectrum(a) => spectrum(g, a),
        Cmd::Mc { cmd } => mc(g, cmd),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
