//! Ensemble time series of the epidemic and energy on a complete graph.
//!
//! cargo run --release --example time_series

use signet::dynamics::Params;
use signet::engine::{run_ensemble, EnsembleStats, InitialConditions, RunConfig};
use signet::graph::{Sign, SignedGraph};

pub fn run_example(n: usize, steps: u64, runs: usize) -> signet::Result<EnsembleStats> {
    let g = SignedGraph::complete(n, Sign::Positive);
    let cfg = RunConfig {
        params: Params { beta: 8.0, beta_a: 2.4, kappa: 2.0, ..Params::default() },
        initial: InitialConditions { rho0: 0.15, r0: 0.25, seed: 7, ..Default::default() },
        steps,
        sample_every: steps / 20,
        ..RunConfig::default()
    };
    run_ensemble(&g, &cfg, runs)
}

fn main() -> signet::Result<()> {
    let stats = run_example(180, 2_000_000, 8)?;
    println!("{:>10} {:>8} {:>8} {:>8} {:>8} {:>9}", "t", "s", "a", "rho", "r", "E");
    for (k, t) in stats.times.iter().enumerate() {
        let m = stats.mean[k];
        println!("{t:>10.1} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>9.4}", m[0], m[1], m[2], m[3], m[6]);
    }
    Ok(())
}
