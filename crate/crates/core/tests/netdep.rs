use nalgebra::DMatrix;
use nonstat::lrv::{KernelFamily, KernelSpec};
use nonstat::netdep::{
    denseness_stats, graph_distance, graph_ma_covariance, network_hac, simulate_graph_ma, Graph, NetworkHacPlan,
};
use nonstat::series::RngSpec;
use nonstat::{stats, MultiSeries};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

/// `y_i = w0 e_i + w1 (e_{i-1} + e_{i+1})` on a cycle, written out directly.
fn cycle_ma(n: usize, w0: f64, w1: f64, rng: RngSpec) -> Vec<f64> {
    let mut r = rng.rng();
    let e: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    (0..n).map(|i| w0 * e[i] + w1 * (e[(i + n - 1) % n] + e[(i + 1) % n])).collect()
}

#[test]
fn covariance_matches_enumeration_and_simulation() {
    let n = 12;
    let g = Graph::cycle(n).unwrap();
    let w = [1.0, 0.5];
    let cov = graph_ma_covariance(&g, 1, &w).unwrap();
    for i in 0..n {
        for k in 0..n {
            // sum over common sources j of w(d(i,j)) w(d(k,j)), counted by hand
            let d = (i as i64 - k as i64).rem_euclid(n as i64).min((k as i64 - i as i64).rem_euclid(n as i64));
            let want = match d {
                0 => 1.0 + 2.0 * 0.25,
                1 => 2.0 * 0.5,
                2 => 0.25,
                _ => 0.0,
            };
            assert_eq!(cov[(i, k)], want, "({i}, {k})");
        }
    }

    let reps = 20_000;
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for r in 0..reps {
        let y = simulate_graph_ma(&g, 1, &w, RngSpec::new(61, r), 1).unwrap();
        let c = y.matrix().column(0).into_owned();
        acc += &c * c.transpose();
    }
    acc /= reps as f64;
    // entries of a product of two unit-scale normals have sd <= 1.6 / sqrt(reps)
    let tol = 5.0 * 1.6 / (reps as f64).sqrt();
    assert!((acc - cov).abs().max() < tol);
}

#[test]
fn standardized_mean_is_normal_on_a_cycle() {
    let (n, reps) = (2000, 10_000);
    let g = Graph::cycle(n).unwrap();
    let plan = NetworkHacPlan::new(&graph_distance(&g), &KernelSpec::new(KernelFamily::Truncated, 2.0).unwrap()).unwrap();
    let z: Vec<f64> = (0..reps)
        .map(|r| {
            let y = cycle_ma(n, 1.0, 0.5, RngSpec::new(62, r));
            let m = stats::mean(&y);
            let v = plan.apply(&MultiSeries::new(DMatrix::from_vec(n, 1, y)).unwrap(), true).unwrap()[(0, 0)];
            (n as f64).sqrt() * m / v.sqrt()
        })
        .collect();
    let ks = stats::ks_normal(&z, 0.0, 1.0);
    assert!(ks < 0.02, "KS {ks}");
}

#[test]
fn node_mean_shrinks_at_root_n() {
    let ns = [100.0, 400.0, 1600.0, 6400.0];
    let reps = 2000;
    let mad: Vec<f64> = ns
        .iter()
        .map(|&n| {
            (0..reps).map(|r| stats::mean(&cycle_ma(n as usize, 1.0, 0.5, RngSpec::new(63, r))).abs()).sum::<f64>()
                / reps as f64
        })
        .collect();
    let slope = stats::log_log_slope(&ns, &mad);
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn denseness_hand_counts() {
    let s = denseness_stats(&Graph::star(5), 1, 1, 1.0).unwrap();
    assert!((s.delta_shell - 10.0 / 6.0).abs() < 1e-12);
    let s = denseness_stats(&Graph::cycle(6).unwrap(), 2, 2, 1.0).unwrap();
    assert!((s.delta_shell - 2.0).abs() < 1e-12);
    let s = denseness_stats(&Graph::empty(4), 1, 1, 1.0).unwrap();
    assert_eq!((s.delta_shell, s.delta_nm, s.c_n), (0.0, 0.0, 0.0));
    assert_eq!(denseness_stats(&Graph::path(3), 0, 0, 2.0).unwrap().delta_shell, 1.0);
}

#[test]
fn quadratic_spectral_is_rejected() {
    let g = Graph::path(5);
    let y = MultiSeries::new(DMatrix::from_element(5, 1, 1.0)).unwrap();
    let k = KernelSpec::new(KernelFamily::QuadraticSpectral, 2.0).unwrap();
    assert!(network_hac(&g, &y, &k, true).is_err());
}

fn random_graph(n: usize, mask: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut it = mask.iter();
    for i in 0..n {
        for j in i + 1..n {
            if *it.next().unwrap_or(&false) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimate_is_symmetric(mask in prop::collection::vec(any::<bool>(), 45), seed in 0u64..1000, b in 0.5f64..5.0) {
        let g = random_graph(10, &mask);
        let y = simulate_graph_ma(&g, 1, &[1.0, 0.3], RngSpec::new(seed, 0), 3).unwrap();
        let v = network_hac(&g, &y, &KernelSpec::bartlett(b), true).unwrap();
        prop_assert_eq!(&v, &v.transpose());
    }

    #[test]
    fn bandwidth_past_the_diameter_changes_nothing(len in 2usize..12, seed in 0u64..1000, extra in 1.0f64..20.0) {
        // a path on `len` nodes has diameter len - 1; the truncated kernel
        // weighs every shell up to the bandwidth by 1
        let g = Graph::path(len);
        let y = simulate_graph_ma(&g, 1, &[1.0, 0.5], RngSpec::new(seed, 1), 1).unwrap();
        let at = |b: f64| network_hac(&g, &y, &KernelSpec::new(KernelFamily::Truncated, b).unwrap(), true).unwrap();
        let base = at((len - 1) as f64);
        prop_assert_eq!(base, at((len - 1) as f64 + extra));
    }

    #[test]
    fn small_bandwidth_keeps_only_the_variance_term(mask in prop::collection::vec(any::<bool>(), 45), seed in 0u64..1000, b in 0.01f64..0.99) {
        let g = random_graph(10, &mask);
        let y = simulate_graph_ma(&g, 0, &[1.0], RngSpec::new(seed, 2), 1).unwrap();
        let v = network_hac(&g, &y, &KernelSpec::bartlett(b), true).unwrap()[(0, 0)];
        let c: Vec<f64> = y.matrix().column(0).iter().copied().collect();
        let m = stats::mean(&c);
        let gamma0 = c.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 10.0;
        prop_assert!((v - gamma0).abs() <= 1e-12 * gamma0.max(1.0));
    }
}
