use nonstat::garch::{garch_filter, garch_qmle, simulate_garch, GarchSpec, QmleOptions};
use nonstat::{stats, RngSpec, TimeSeries};
use proptest::prelude::*;

#[test]
fn refit_on_simulated_estimate_stays_put() {
    let truth = GarchSpec::new(0.1, 0.1, 0.8, 0.0).unwrap();
    let n = 20_000;
    let opts = QmleOptions::default();
    let (y, _) = simulate_garch(&truth, n, RngSpec::new(120, 0)).unwrap();
    let hat = garch_qmle(&y, &truth, &opts).unwrap().spec;
    let reps = 20;
    let mut drift = [Vec::new(), Vec::new(), Vec::new()];
    for r in 0..reps {
        let (y, _) = simulate_garch(&hat, n, RngSpec::new(121, r)).unwrap();
        let again = garch_qmle(&y, &hat, &opts).unwrap().spec;
        drift[0].push(again.omega - hat.omega);
        drift[1].push(again.alpha - hat.alpha);
        drift[2].push(again.beta - hat.beta);
    }
    for (name, d) in ["omega", "alpha", "beta"].iter().zip(&drift) {
        let m = stats::median(d);
        assert!(m.abs() < 0.03, "{name} drift {m}");
    }
}

#[test]
fn best_cost_never_increases() {
    let truth = GarchSpec::new(0.2, 0.15, 0.7, 0.5).unwrap();
    let (y, _) = simulate_garch(&truth, 3000, RngSpec::new(122, 0)).unwrap();
    let fit = garch_qmle(&y, &GarchSpec::new(0.05, 0.05, 0.9, 0.0).unwrap(), &QmleOptions::default()).unwrap();
    assert!(!fit.cost_path.is_empty());
    for w in fit.cost_path.windows(2) {
        assert!(w[1] <= w[0], "{} then {}", w[0], w[1]);
    }
    // the reported likelihood is the last best cost scaled by n
    let last = *fit.cost_path.last().unwrap();
    assert!((fit.neg_loglik / 3000.0 - last).abs() <= 1e-12 * last.abs());
}

#[test]
fn short_series_is_a_size_error() {
    let y = TimeSeries::new(vec![0.1; 49]).unwrap();
    let spec = GarchSpec::new(0.1, 0.1, 0.8, 0.0).unwrap();
    assert!(matches!(garch_qmle(&y, &spec, &QmleOptions::default()), Err(nonstat::Error::Size(_))));
}

#[test]
fn ar1_mean_variant_recovers_the_mean_coefficient() {
    let spec = GarchSpec::new(0.1, 0.1, 0.8, 0.0).unwrap();
    let (e, _) = simulate_garch(&spec, 20_000, RngSpec::new(123, 0)).unwrap();
    let mut y = Vec::with_capacity(e.len());
    let mut prev = 2.0;
    for v in e.values() {
        prev = 2.0 + 0.5 * (prev - 2.0) + v;
        y.push(prev);
    }
    let opts = QmleOptions { ar1_mean: true, ..QmleOptions::default() };
    let fit = garch_qmle(&TimeSeries::new(y).unwrap(), &spec, &opts).unwrap();
    assert!((fit.ar1_coef.unwrap() - 0.5).abs() < 0.03);
    assert!((fit.spec.mu - 2.0).abs() < 0.05);
    assert!((fit.spec.alpha - 0.1).abs() < 0.05 && (fit.spec.beta - 0.8).abs() < 0.08);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn filter_stays_above_its_floor(
        omega in 1e-4f64..2.0,
        alpha in 0.0f64..0.5,
        frac in 0.0f64..0.99,
        s0 in 1e-3f64..10.0,
        eps in prop::collection::vec(-20.0f64..20.0, 1..200),
    ) {
        let beta = (1.0 - alpha) * frac;
        let spec = GarchSpec::new(omega, alpha, beta, 0.0).unwrap();
        let s = garch_filter(&TimeSeries::new(eps).unwrap(), &spec, s0).unwrap();
        for (t, v) in s.values().iter().enumerate() {
            let floor = if t == 0 { s0 } else { omega.min(s0 * beta.powi(t as i32)) };
            prop_assert!(*v >= floor && *v > 0.0, "t = {}: {} below {}", t, v, floor);
        }
    }
}
