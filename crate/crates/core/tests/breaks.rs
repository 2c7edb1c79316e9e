use nalgebra::{DMatrix, DVector};
use nonstat::breaks::{lm_nyblom, me_monitor, nbb_sup_mc, split_wald, split_wald_separate_intercepts, sup_wald};
use nonstat::series::{simulate_predictive_system, LurSpec, SystemSpec};
use nonstat::{stats, MultiSeries, RngSpec, TimeSeries};
use proptest::prelude::*;

fn stationary_system() -> SystemSpec {
    SystemSpec::scalar(0.0, LurSpec::new(-0.5, 0.0).unwrap(), 0.0)
}

/// Adds `delta * x_{t-1}` to `y_t` for `t >= k`.
fn with_break(y: &TimeSeries, x: &MultiSeries, k: usize, delta: f64) -> TimeSeries {
    let xs = x.column(0);
    TimeSeries::new(
        (0..y.len())
            .map(|t| y.values()[t] + if t >= k && t > 0 { delta * xs.values()[t - 1] } else { 0.0 })
            .collect(),
    )
    .unwrap()
}

#[test]
fn fixed_break_wald_under_stationary_null() {
    let n = 1000;
    let w: Vec<f64> = (0..3000)
        .map(|r| {
            let (y, x) = simulate_predictive_system(&stationary_system(), n, RngSpec::new(61, r)).unwrap();
            split_wald(&y, &x, (n - 1) / 2, true).unwrap()
        })
        .collect();
    let q = stats::quantile(&w, 0.95);
    assert!((q / stats::chi2_quantile(1.0, 0.95) - 1.0).abs() < 0.10, "q95 {q}");
}

#[test]
fn large_break_detected_at_true_date() {
    let n = 500;
    let k = n / 2;
    let cv = stats::chi2_quantile(1.0, 0.99);
    let reps = 400;
    let (mut hits, mut peak) = (0, 0);
    for r in 0..reps {
        let (y, x) = simulate_predictive_system(&stationary_system(), n, RngSpec::new(62, r)).unwrap();
        // x has unit-order variance (about 1.33), so 5 population SDs of y.
        let yb = with_break(&y, &x, k + 1, 5.0 / 1.33f64.sqrt());
        hits += usize::from(split_wald(&yb, &x, k, true).unwrap() > cv);
        let scan = sup_wald(&yb, &x, (0.15, 0.85), true).unwrap();
        let at = scan.breaks.iter().position(|b| *b == k).unwrap();
        let path = &scan.wald_path;
        peak += usize::from(path[at] >= path[0] && path[at] >= path[path.len() - 1]);
    }
    assert!(hits as f64 >= 0.99 * reps as f64, "{hits}");
    assert!(peak as f64 >= 0.85 * reps as f64, "{peak}");
}

#[test]
fn nbb_quantile_stable_across_seeds() {
    let a = nbb_sup_mc(1, (0.15, 0.85), 500, 50_000, RngSpec::new(63, 0)).unwrap().get(0.95).unwrap();
    let b = nbb_sup_mc(1, (0.15, 0.85), 500, 50_000, RngSpec::new(64, 0)).unwrap().get(0.95).unwrap();
    assert!((a / b - 1.0).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn lm1_equals_kpss_level_statistic() {
    let n = 2000;
    let (y, x) = simulate_predictive_system(&stationary_system(), n, RngSpec::new(65, 0)).unwrap();
    let lm = lm_nyblom(&y, &x).unwrap();
    // Residuals of y_t on (1, x_{t-1}, dx_t) over t = 2..n by normal equations.
    let xs = x.column(0);
    let xv = xs.values();
    let t_obs = n - 1;
    let design = DMatrix::from_fn(t_obs, 3, |i, j| match j {
        0 => 1.0,
        1 => xv[i],
        _ => xv[i + 1] - xv[i],
    });
    let yy = DVector::from_iterator(t_obs, y.values()[1..].iter().copied());
    let b = (design.transpose() * &design).try_inverse().unwrap() * design.transpose() * &yy;
    let e = &yy - &design * b;
    let s2 = e.dot(&e) / t_obs as f64;
    let mut s = 0.0;
    let mut acc = 0.0;
    for v in e.iter() {
        s += v;
        acc += s * s;
    }
    let kpss = acc / (t_obs as f64).powi(2) / s2;
    assert!((lm.lm1 - kpss).abs() < 1e-10 * kpss.max(1.0), "{} vs {kpss}", lm.lm1);
}

#[test]
fn lm2_grows_under_random_walk_coefficients() {
    let medians: Vec<f64> = [250usize, 1000, 4000]
        .iter()
        .map(|&n| {
            let v: Vec<f64> = (0..100)
                .map(|r| {
                    let (y, x) = simulate_predictive_system(&stationary_system(), n, RngSpec::new(66, r)).unwrap();
                    let steps = nonstat::series::simulate_linear_process(
                        &nonstat::series::LinearProcessSpec::white_noise(0.05).unwrap(),
                        n,
                        RngSpec::new(67, r),
                    )
                    .unwrap();
                    let mut beta = 0.0;
                    let xs = x.column(0);
                    let yb: Vec<f64> = (0..n)
                        .map(|t| {
                            beta += steps.values()[t];
                            y.values()[t] + if t > 0 { beta * xs.values()[t - 1] } else { 0.0 }
                        })
                        .collect();
                    lm_nyblom(&TimeSeries::new(yb).unwrap(), &x).unwrap().lm2
                })
                .collect();
            stats::median(&v)
        })
        .collect();
    assert!(medians[0] < medians[1] && medians[1] < medians[2], "{medians:?}");
}

#[test]
fn moving_estimates_locate_a_break() {
    let n = 800;
    let n_hist = 400;
    let h = 0.25;
    let w = (n_hist as f64 * h) as usize;
    let brk = n_hist + (n - n_hist) / 2;
    let reps = 200;
    let hits = (0..reps)
        .filter(|r| {
            let (y, x) = simulate_predictive_system(&stationary_system(), n, RngSpec::new(68, *r)).unwrap();
            let xs = x.column(0);
            let design = MultiSeries::new(DMatrix::from_fn(n, 2, |t, j| if j == 0 { 1.0 } else { xs.values()[t] })).unwrap();
            let yb = TimeSeries::new((0..n).map(|t| y.values()[t] + if t >= brk { 1.5 * xs.values()[t] } else { 0.0 }).collect()).unwrap();
            let me = me_monitor(&yb, &design, h, n_hist).unwrap();
            (me.argmax_k as i64 - brk as i64).unsigned_abs() as usize <= w
        })
        .count();
    assert!(hits as f64 >= 0.8 * reps as f64, "{hits} of {reps}");
}

#[test]
fn global_demeaning_matches_separate_intercepts_in_large_samples() {
    let sys = SystemSpec::scalar(0.0, LurSpec::new(-5.0, 0.75).unwrap(), 0.0);
    let n = 4000;
    let ratios: Vec<f64> = (0..200)
        .map(|r| {
            let (y, x) = simulate_predictive_system(&sys, n, RngSpec::new(69, r)).unwrap();
            let k = n / 2;
            split_wald(&y, &x, k, true).unwrap() / split_wald_separate_intercepts(&y, &x, k).unwrap()
        })
        .collect();
    let med = stats::median(&ratios);
    assert!((med - 1.0).abs() < 0.05, "median ratio {med}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sup_monotone_in_trim_and_scale_free(seed in any::<u64>(), a in 0.05f64..50.0, inner in 0.0f64..0.2) {
        let n = 200;
        let (y, x) = simulate_predictive_system(&SystemSpec::scalar(0.0, LurSpec::new(-5.0, 0.75).unwrap(), 0.3), n, RngSpec::new(seed, 0)).unwrap();
        let wide = sup_wald(&y, &x, (0.15, 0.85), true).unwrap().sup_stat;
        let narrow = sup_wald(&y, &x, (0.15 + inner, 0.85 - inner), true).unwrap().sup_stat;
        prop_assert!(narrow <= wide);
        let ys = y.scaled(a);
        let scaled = sup_wald(&ys, &x, (0.15, 0.85), true).unwrap().sup_stat;
        prop_assert!((scaled - wide).abs() < 1e-7 * (1.0 + wide));
        let (l0, l1) = (lm_nyblom(&y, &x).unwrap(), lm_nyblom(&ys, &x).unwrap());
        prop_assert!((l0.lm - l1.lm).abs() < 1e-7 * (1.0 + l0.lm));
        let d = MultiSeries::new(DMatrix::from_fn(n, 2, |t, j| if j == 0 { 1.0 } else { x.matrix()[(t, 0)] })).unwrap();
        let (m0, m1) = (me_monitor(&y, &d, 0.25, 100).unwrap(), me_monitor(&ys, &d, 0.25, 100).unwrap());
        prop_assert!((m0.max_stat - m1.max_stat).abs() < 1e-7 * (1.0 + m0.max_stat));
    }
}
