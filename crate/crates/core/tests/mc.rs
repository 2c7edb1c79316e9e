use nalgebra::DMatrix;
use nonstat::mc::{
    nested_forecast_test, parse_grid, read_replications, run_experiment, simulate_experiment, size_power_grid,
    summarize, ExperimentConfig, QuantileTable,
};
use nonstat::series::{simulate_linear_process, LinearProcessSpec};
use nonstat::{MultiSeries, RngSpec, TimeSeries};

fn ones(n: usize) -> MultiSeries {
    MultiSeries::new(DMatrix::from_element(n, 1, 1.0)).unwrap()
}

#[test]
fn noiseless_irrelevant_regressor_gives_zero() {
    let n = 200;
    let x2 = simulate_linear_process(&LinearProcessSpec::ar1_truncated(0.5, 1.0, 40).unwrap(), n, RngSpec::new(140, 0))
        .unwrap();
    let y = TimeSeries::new(vec![3.0; n]).unwrap();
    let r = nested_forecast_test(&y, &ones(n), &x2.to_multi(), 20).unwrap();
    assert_eq!(r.stat, 0.0);
    assert!(r.path.iter().all(|v| *v == 0.0));
    assert!(r.warning.is_none());
}

#[test]
fn strong_extra_regressor_makes_the_statistic_positive() {
    let cfg = ExperimentConfig::new("nested-forecast", 1000, 400, 141).with_dgp("beta2", 1.0);
    let out = simulate_experiment(&cfg, None).unwrap();
    let share = out.summary("positive").unwrap().mean;
    assert!(share >= 0.9, "positive share {share}");
}

#[test]
fn early_start_is_postponed_with_a_warning() {
    let n = 60;
    let x2 = simulate_linear_process(&LinearProcessSpec::white_noise(1.0).unwrap(), n, RngSpec::new(142, 0)).unwrap();
    let y = simulate_linear_process(&LinearProcessSpec::white_noise(1.0).unwrap(), n, RngSpec::new(142, 1)).unwrap();
    let r = nested_forecast_test(&y, &ones(n), &x2.to_multi(), 1).unwrap();
    assert_eq!(r.start, 4);
    assert!(r.warning.unwrap().contains("postponed"));
}

#[test]
fn ivx_null_experiment_is_sized() {
    let cfg = ExperimentConfig::new("ivx-null", 1000, 5000, 143);
    let rate = simulate_experiment(&cfg, None).unwrap().rejection_rate().unwrap();
    assert!((0.035..=0.065).contains(&rate), "rejection rate {rate}");
}

#[test]
fn single_config_grid_equals_the_summary() {
    let cfg = ExperimentConfig::new("ivx-null", 200, 300, 144);
    let grid = size_power_grid(std::slice::from_ref(&cfg), None).unwrap();
    let out = simulate_experiment(&cfg, None).unwrap();
    assert_eq!(grid.rows.len(), 1);
    let s = out.summary("reject").unwrap();
    assert_eq!((grid.rows[0].value, grid.rows[0].mc_se, grid.rows[0].reps), (s.mean, s.mc_se, 300));
}

#[test]
fn stationary_regressors_forecast_better_than_mixed() {
    let configs = parse_grid(include_str!("../examples/configs/forecast_mse.conf")).unwrap();
    let grid = size_power_grid(&configs, None).unwrap();
    let mse = |label: &str| grid.rows.iter().find(|r| r.label == label).unwrap().value;
    assert!(mse("stationary") <= mse("mixed"), "{} vs {}", mse("stationary"), mse("mixed"));
}

#[test]
fn summary_is_recomputable_from_the_replication_file() {
    let cfg = ExperimentConfig::new("pp-size", 0, 0, 145);
    let cfg = ExperimentConfig { n: vec![100, 200], reps: 50, ..cfg };
    let out = simulate_experiment(&cfg, None).unwrap();
    let mut buf = Vec::new();
    out.write_replications(&mut buf).unwrap();
    let (columns, blocks) = read_replications(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(columns, out.columns);
    assert_eq!(blocks.len(), 2);
    for ((n, rows), b) in blocks.iter().zip(&out.blocks) {
        assert_eq!(*n, b.n);
        assert_eq!(summarize(&columns, rows), b.summary);
    }
}

#[test]
fn output_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new("lrv-ar1", 500, 20, 146);
    let read = |p: &std::path::Path| std::fs::read(p).unwrap();
    cfg.output = Some(dir.path().join("a.csv"));
    run_experiment(&cfg, None).unwrap();
    cfg.output = Some(dir.path().join("b.csv"));
    run_experiment(&cfg, Some(2)).unwrap();
    assert_eq!(read(&dir.path().join("a.csv")), read(&dir.path().join("b.csv")));
    assert_eq!(read(&dir.path().join("a.summary.csv")), read(&dir.path().join("b.summary.csv")));
}

#[test]
fn quantile_table_is_monotone() {
    let sample: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 10.0 - 20.0).collect();
    let t = QuantileTable::from_sample(&sample, &QuantileTable::DEFAULT_PROBS, RngSpec::new(1, 0));
    assert!(t.values.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(t.reps, 1000);
}
