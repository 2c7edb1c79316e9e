//! Network HAC variance of a sample mean under graph moving-average
//! dependence, read from an edge list, with denseness diagnostics.

use nonstat::lrv::KernelSpec;
use nonstat::netdep::{denseness_stats, graph_ma_covariance, network_hac, simulate_graph_ma, Graph};
use nonstat::RngSpec;

fn main() -> nonstat::Result<()> {
    let text = include_str!("data/ring.edges");
    let small = Graph::parse_edge_list(text)?;
    let s = denseness_stats(&small, 2, 1, 1.0)?;
    println!("ring with chord: {} nodes, {} edges, c_n {:.3}", small.n(), small.edges().len(), s.c_n);

    // A larger cycle where the truth is known.
    let g = Graph::cycle(2000)?;
    let weights = [1.0, 0.5];
    let cov = graph_ma_covariance(&g, 1, &weights)?;
    let truth = cov.sum() / g.n() as f64;
    let y = simulate_graph_ma(&g, 1, &weights, RngSpec::new(6, 0), 1)?;
    for b in [1.0, 3.0, 6.0] {
        let v = network_hac(&g, &y, &KernelSpec::bartlett(b), true)?;
        println!("bandwidth {b}: V_hat {:.3} (truth {truth:.3})", v[(0, 0)]);
    }
    Ok(())
}
