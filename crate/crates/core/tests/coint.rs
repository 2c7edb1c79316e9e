use nalgebra::DMatrix;
use nonstat::coint::{fk_break_test, fmols, shin_vn, shin_vn_residuals, simulate_cointegration, BreakPoint, ShinVariance};
use nonstat::lrv::KernelSpec;
use nonstat::series::{simulate_lur_ar, Innovations, LinearProcessSpec, LurSpec};
use nonstat::{stats, MultiSeries, RngSpec, TimeSeries};
use proptest::prelude::*;

fn random_walk(n: usize, rng: RngSpec) -> TimeSeries {
    let wn = LinearProcessSpec::white_noise(1.0).unwrap();
    simulate_lur_ar(&LurSpec::unit_root(), Innovations::Linear(&wn), 0.0, n, rng).unwrap()
}

#[test]
fn stationarity_statistic_ranks_cointegration_below_spurious() {
    let n = 500;
    let k = KernelSpec::bartlett_default(n);
    let reps = 200;
    let ordered = (0..reps)
        .filter(|r| {
            let (y, x) = simulate_cointegration(0.0, &[1.0], 0.5, n, RngSpec::new(41, *r)).unwrap();
            let coint = shin_vn(&y, &x, &k, ShinVariance::Kernel).unwrap();
            let y2 = random_walk(n, RngSpec::new(42, *r));
            let spurious = shin_vn(&y2, &x, &k, ShinVariance::Kernel).unwrap();
            coint < spurious
        })
        .count();
    assert!(ordered as f64 >= 0.95 * reps as f64, "{ordered} of {reps}");
}

#[test]
fn known_break_fk_follows_chi_square() {
    let n = 1000;
    let k = KernelSpec::bartlett_default(n);
    let stats_: Vec<f64> = (0..1000)
        .map(|r| {
            let (y, x) = simulate_cointegration(0.0, &[1.0], 0.5, n, RngSpec::new(43, r)).unwrap();
            fk_break_test(&y, &x, &k, BreakPoint::Known(n / 2)).unwrap().stat
        })
        .collect();
    let q = stats::quantile(&stats_, 0.95);
    let chi = stats::chi2_quantile(2.0, 0.95);
    assert!((q / chi - 1.0).abs() < 0.10, "q95 {q} vs {chi}");
}

#[test]
fn large_slope_break_is_located() {
    let n = 600;
    let k = KernelSpec::bartlett_default(n);
    let reps = 100;
    let hits = (0..reps)
        .filter(|r| {
            let (y, x) = simulate_cointegration(0.0, &[1.0], 0.3, n, RngSpec::new(44, *r)).unwrap();
            let yb: Vec<f64> = (0..n).map(|t| y.values()[t] + if t >= n / 2 { x.matrix()[(t, 0)] } else { 0.0 }).collect();
            let fk = fk_break_test(&TimeSeries::new(yb).unwrap(), &x, &k, BreakPoint::default()).unwrap();
            (fk.argmax_k as f64 - (n / 2) as f64).abs() <= 0.05 * n as f64
        })
        .count();
    assert!(hits as f64 >= 0.9 * reps as f64, "{hits} of {reps}");
}

#[test]
fn correction_vanishes_under_exogeneity() {
    // u independent of dx and a bandwidth below one: the corrections are
    // O_p(n^-1/2) against a sum x x' of order n^2, so the gap is O_p(n^-3/2).
    let ns = [250usize, 1000, 4000];
    let gaps: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let g: Vec<f64> = (0..200)
                .map(|r| {
                    let (y, x) = simulate_cointegration(0.0, &[1.0], 0.0, n, RngSpec::new(45, r)).unwrap();
                    let f = fmols(&y, &x, &KernelSpec::bartlett(0.5)).unwrap();
                    (f.beta_plus[1] - f.beta_ols[1]).abs()
                })
                .collect();
            stats::mean(&g)
        })
        .collect();
    let slope = stats::log_log_slope(&ns.map(|n| n as f64), &gaps);
    assert!(slope < -1.0 && (slope + 1.5).abs() < 0.3, "slope {slope}, gaps {gaps:?}");
}

#[test]
fn exact_cointegration_gives_small_v() {
    let n = 300;
    let x = random_walk(n, RngSpec::new(46, 0));
    let noise = random_walk(n + 1, RngSpec::new(47, 0)).diff();
    let y = TimeSeries::new((0..n).map(|t| 2.0 * x.values()[t] + 1e-3 * noise[t]).collect()).unwrap();
    let v = shin_vn(&y, &x.to_multi(), &KernelSpec::bartlett_default(n), ShinVariance::ShortRun).unwrap();
    assert!(v < 1.0);
    let direct = shin_vn_residuals(&noise[..n], &KernelSpec::bartlett_default(n), ShinVariance::ShortRun).unwrap();
    assert!(direct.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fk_and_v_invariances(seed in any::<u64>(), a in 0.05f64..20.0, shift in -30.0f64..30.0) {
        let n = 160;
        let (y, x) = simulate_cointegration(0.5, &[1.0], 0.4, n, RngSpec::new(seed, 0)).unwrap();
        let k = KernelSpec::bartlett(5.0);
        let scaled = y.scaled(a);
        let f0 = fk_break_test(&y, &x, &k, BreakPoint::Known(80)).unwrap().stat;
        let f1 = fk_break_test(&scaled, &x, &k, BreakPoint::Known(80)).unwrap().stat;
        prop_assert!((f0 - f1).abs() < 1e-7 * (1.0 + f0.abs()));
        let v0 = shin_vn(&y, &x, &k, ShinVariance::Kernel).unwrap();
        let v1 = shin_vn(&y.shifted(shift), &x, &k, ShinVariance::Kernel).unwrap();
        prop_assert!((v0 - v1).abs() < 1e-8 * (1.0 + v0));
        let m = MultiSeries::new(DMatrix::from_fn(n, 1, |t, _| x.matrix()[(t, 0)])).unwrap();
        prop_assert_eq!(m.matrix(), x.matrix());
    }
}
