//! Parses a signed edge list and draws connected bootstrap samples from it.
//!
//! cargo run --example dataset_bootstrap -- [path] [snap|bitcoin|generic] [size]

use std::path::PathBuf;

use signet::dataset::{
    bootstrap_connected_subgraph, graph_stats, parse_edge_list, DatasetFormat, DatasetSpec, GraphStats,
};

pub fn run_example(spec: &DatasetSpec, size: usize, samples: u64) -> signet::Result<(GraphStats, Vec<GraphStats>)> {
    let data = parse_edge_list(spec)?;
    let whole = graph_stats(&data.graph);
    let drawn = (0..samples)
        .map(|seed| bootstrap_connected_subgraph(&data.graph, size, seed).map(|s| graph_stats(&s.graph)))
        .collect::<signet::Result<Vec<_>>>()?;
    Ok((whole, drawn))
}

fn main() -> signet::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny_generic.csv"));
    let format: DatasetFormat = args.next().as_deref().unwrap_or("generic").parse()?;
    let size = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let (whole, drawn) = run_example(&DatasetSpec { path, format }, size, 10)?;
    println!(
        "n={} m={} density={:.4} triads={} balanced={:.3}",
        whole.n, whole.m, whole.density, whole.triads, whole.balanced_fraction
    );
    let mean = drawn.iter().map(|s| s.density).sum::<f64>() / drawn.len() as f64;
    println!("{} samples of {size} nodes, mean density {mean:.4}", drawn.len());
    Ok(())
}
