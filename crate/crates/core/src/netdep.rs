//! Network-indexed data: graph distances and neighborhood shells,
//! denseness statistics, a finite-radius graph moving-average DGP, and the
//! network HAC variance estimator.
//!
//! Nodes are 0-based in the API; the edge-list text format is 1-based.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lrv::{KernelFamily, KernelSpec};
use crate::series::{normals, MultiSeries, RngSpec};

/// Simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Build from 0-based edges; self-loops and repeated edges are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::spec(format!("edge ({a}, {b}) references a node outside 0..{n}")));
            }
            if a == b {
                return Err(Error::spec(format!("self-loop at node {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::spec(format!("duplicate edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        Ok(Graph { n, adj })
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, adj: vec![Vec::new(); n] }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &edges).expect("path edges are simple")
    }

    /// Cycle on `n >= 3` nodes.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::spec("a cycle needs at least 3 nodes"));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges)
    }

    /// Star with node 0 at the center and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::new(leaves + 1, &edges).expect("star edges are simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Edges with `a < b`, 0-based.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, l) in self.adj.iter().enumerate() {
            out.extend(l.iter().filter(|b| **b > a).map(|b| (a, *b)));
        }
        out
    }

    /// Parse the edge-list format: a header line `n=<count>`, then one
    /// `i j` pair of 1-based ids per line. Blank lines and `#` comments are
    /// skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected header `n=<count>`, got `{header}`")))?;
        let mut edges = Vec::new();
        for (no, line) in lines {
            let ids: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
            match ids[..] {
                [a, b] if a >= 1 && b >= 1 => edges.push((a - 1, b - 1)),
                _ => return Err(Error::Parse(format!("line {}: expected two 1-based ids", no + 1))),
            }
        }
        Graph::new(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n={}\n", self.n);
        for (a, b) in self.edges() {
            writeln!(s, "{} {}", a + 1, b + 1).expect("writing to a String");
        }
        s
    }

    fn bfs(&self, src: usize) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; self.n];
        d[src] = 0.0;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if d[v].is_infinite() {
                    d[v] = d[u] + 1.0;
                    q.push_back(v);
                }
            }
        }
        d
    }
}

/// Shortest-path lengths; disconnected pairs are `f64::INFINITY`.
pub fn graph_distance(g: &Graph) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = (0..g.n).into_par_iter().map(|i| g.bfs(i)).collect();
    DMatrix::from_fn(g.n, g.n, |i, j| rows[i][j])
}

/// Nodes at distance exactly `s` from `i`, ascending; `shell(g, i, 0) = {i}`.
pub fn shell(g: &Graph, i: usize, s: usize) -> Vec<usize> {
    g.bfs(i)
        .iter()
        .enumerate()
        .filter(|(_, d)| **d == s as f64)
        .map(|(j, _)| j)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetStats {
    /// `n^-1 sum_i |N(i; s) shell|^k`.
    pub delta_shell: f64,
    /// `n^-1 sum_i max_{j in shell(i; s)} |N(i; m) \ N(j; s - 1)|^k`.
    pub delta_nm: f64,
    /// Infimum over the exponent grid of
    /// `Delta(s, m; k a)^(1/a) delta_shell(s; a/(a-1))^(1 - 1/a)`.
    pub c_n: f64,
    /// Grid exponent attaining `c_n`.
    pub best_a: f64,
}

/// Exponent grid for the infimum in `c_n`: 1.01, then 1.05 to 8 in steps
/// of 0.05, then 16 and 32.
pub fn c_n_grid() -> Vec<f64> {
    let mut g = vec![1.01];
    g.extend((1..=140).map(|i| 1.0 + 0.05 * i as f64));
    g.extend([16.0, 32.0]);
    g
}

/// Denseness statistics of a graph for shell radius `s`, neighborhood
/// radius `m` and moment `k >= 1`.
pub fn denseness_stats(g: &Graph, s: usize, m: usize, k: f64) -> Result<NetStats> {
    if !(k >= 1.0) {
        return Err(Error::Domain(format!("moment k = {k} must be >= 1")));
    }
    let dist = graph_distance(g);
    let n = g.n;
    if n == 0 {
        return Err(Error::Size("graph has no nodes".into()));
    }
    let sf = s as f64;
    let mf = m as f64;
    // per node: shell size and the largest uncovered neighborhood count
    let per: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let shell_i: Vec<usize> = (0..n).filter(|&j| dist[(i, j)] == sf).collect();
            let worst = shell_i
                .iter()
                .map(|&j| {
                    (0..n)
                        .filter(|&l| dist[(i, l)] <= mf && (s == 0 || dist[(j, l)] > sf - 1.0))
                        .count()
                })
                .max()
                .unwrap_or(0);
            (shell_i.len() as f64, worst as f64)
        })
        .collect();
    let nf = n as f64;
    let delta_shell_p = |p: f64| per.iter().map(|(c, _)| c.powf(p)).sum::<f64>() / nf;
    let delta_nm_p = |p: f64| per.iter().map(|(_, w)| w.powf(p)).sum::<f64>() / nf;
    let (best_a, c_n) = c_n_grid()
        .into_iter()
        .map(|a| {
            let v = delta_nm_p(k * a).powf(1.0 / a) * delta_shell_p(a / (a - 1.0)).powf(1.0 - 1.0 / a);
            (a, v)
        })
        .fold((f64::NAN, f64::INFINITY), |acc, (a, v)| if v < acc.1 { (a, v) } else { acc });
    Ok(NetStats { delta_shell: delta_shell_p(k), delta_nm: delta_nm_p(k), c_n, best_a })
}

/// `Y_i = sum_{j: d(i,j) <= m} w_{d(i,j)} e_j` with iid standard normal
/// `e_j` in `v` independent components.
pub fn simulate_graph_ma(g: &Graph, m: usize, weights: &[f64], rng: RngSpec, v: usize) -> Result<MultiSeries> {
    simulate_graph_ma_dist(&graph_distance(g), m, weights, rng, v)
}

/// [`simulate_graph_ma`] with a precomputed distance matrix.
pub fn simulate_graph_ma_dist(dist: &DMatrix<f64>, m: usize, weights: &[f64], rng: RngSpec, v: usize) -> Result<MultiSeries> {
    if weights.len() != m + 1 {
        return Err(Error::spec(format!("radius {m} needs {} weights, got {}", m + 1, weights.len())));
    }
    if v == 0 {
        return Err(Error::spec("output dimension must be >= 1"));
    }
    let n = dist.nrows();
    let e = normals(&mut rng.rng(), n * v);
    let mut y = DMatrix::zeros(n, v);
    for i in 0..n {
        for j in 0..n {
            let d = dist[(i, j)];
            if d <= m as f64 {
                let w = weights[d as usize];
                for c in 0..v {
                    y[(i, c)] += w * e[j * v + c];
                }
            }
        }
    }
    MultiSeries::new(y)
}

/// Exact `Cov(Y_i, Y_k)` of the graph moving average (per component).
pub fn graph_ma_covariance(g: &Graph, m: usize, weights: &[f64]) -> Result<DMatrix<f64>> {
    if weights.len() != m + 1 {
        return Err(Error::spec(format!("radius {m} needs {} weights", m + 1)));
    }
    let dist = graph_distance(g);
    let n = g.n;
    let w = |i: usize, j: usize| {
        let d = dist[(i, j)];
        if d <= m as f64 { weights[d as usize] } else { 0.0 }
    };
    Ok(DMatrix::from_fn(n, n, |i, k| (0..n).map(|j| w(i, j) * w(k, j)).sum()))
}

/// Kernel weights of every node pair within the bandwidth, reusable
/// across samples on the same graph.
#[derive(Debug, Clone)]
pub struct NetworkHacPlan {
    n: usize,
    /// `(i, j, weight)` for `i < j` at finite distance `1..=floor(b)`.
    pairs: Vec<(usize, usize, f64)>,
}

impl NetworkHacPlan {
    pub fn new(dist: &DMatrix<f64>, kernel: &KernelSpec) -> Result<Self> {
        kernel.validate()?;
        if kernel.family == KernelFamily::QuadraticSpectral {
            return Err(Error::spec("network HAC needs a kernel vanishing outside [-1, 1]"));
        }
        let b = kernel.bandwidth;
        let n = dist.nrows();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = dist[(i, j)];
                if d.is_finite() && d <= b.floor() {
                    let w = kernel.weight(d / b);
                    if w != 0.0 {
                        pairs.push((i, j, w));
                    }
                }
            }
        }
        Ok(NetworkHacPlan { n, pairs })
    }

    /// `sum_s w(s/b) Omega(s)` with
    /// `Omega(s) = n^-1 sum_i sum_{j in shell(i; s)} (Y_i - Ybar)(Y_j - Ybar)'`.
    pub fn apply(&self, y: &MultiSeries, demean: bool) -> Result<DMatrix<f64>> {
        if y.nrows() != self.n {
            return Err(Error::Size(format!("{} observations for a graph of {} nodes", y.nrows(), self.n)));
        }
        let mut c = y.matrix().clone();
        if demean {
            for mut col in c.column_iter_mut() {
                let m = col.mean();
                col.add_scalar_mut(-m);
            }
        }
        let mut v = c.tr_mul(&c);
        for &(i, j, w) in &self.pairs {
            let yi = c.row(i);
            let yj = c.row(j);
            let cross = yi.transpose() * yj;
            v += (&cross + cross.transpose()) * w;
        }
        v /= self.n as f64;
        Ok((&v + v.transpose()) * 0.5)
    }
}

/// Network HAC estimate of the long-run variance of `sqrt(n) Ybar`.
/// The result can fail to be positive semi-definite; see
/// [`clip_eigenvalues`].
pub fn network_hac(g: &Graph, y: &MultiSeries, kernel: &KernelSpec, demean: bool) -> Result<DMatrix<f64>> {
    NetworkHacPlan::new(&graph_distance(g), kernel)?.apply(y, demean)
}

/// Floor the eigenvalues of a symmetric matrix at zero.
pub fn clip_eigenvalues(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let vals = eig.eigenvalues.map(|v| v.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}
