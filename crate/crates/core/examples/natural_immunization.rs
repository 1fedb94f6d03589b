//! With no infection pressure the friendly links settle into two clusters
//! separated by hostile links.
//!
//! cargo run --release --example natural_immunization

use signet::dynamics::Params;
use signet::engine::{run, ClusterReport, InitialConditions, RunConfig};
use signet::graph::{Sign, SignedGraph};

pub fn run_example(n: usize, steps: u64, seed: u64) -> signet::Result<ClusterReport> {
    let g = SignedGraph::complete(n, Sign::Positive);
    let cfg = RunConfig {
        params: Params { beta: 0.0, beta_a: 0.0, kappa: 4.0, ..Params::default() },
        initial: InitialConditions { rho0: 0.15, r0: 0.1, seed, ..Default::default() },
        steps,
        sample_every: steps,
        ..RunConfig::default()
    };
    Ok(run(&g, &cfg)?.clusters)
}

fn main() -> signet::Result<()> {
    let c = run_example(180, 5_000_000, 3)?;
    println!(
        "{} friendly clusters, {:.1}% of hostile links cross between them",
        c.count,
        100.0 * c.negative_cross_fraction
    );
    for (k, comp) in c.components.iter().enumerate() {
        println!(
            "  cluster {k}: {} nodes (S {} / A {} / I {})",
            comp.size, comp.susceptible, comp.alert, comp.infected
        );
    }
    Ok(())
}
