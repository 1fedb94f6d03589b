//! Incremental energy changes for single proposals, checked against a full
//! recomputation.
//!
//! cargo run --example energy_deltas

use signet::dynamics::Change;
use signet::energy::{NodeState, NormalizationMode};
use signet::engine::NetworkState;
use signet::graph::{Sign, SignedGraph};

/// Returns (proposal, incremental dE, recomputed dE) for each proposal.
pub fn run_example() -> signet::Result<Vec<(String, f64, f64)>> {
    use NodeState::*;
    let mut g = SignedGraph::complete(5, Sign::Positive);
    g.set_sign(0, 1, Sign::Negative)?;
    g.set_sign(2, 4, Sign::Negative)?;
    let states = vec![Susceptible, Infected, Alert, Susceptible, Infected];
    let base = NetworkState::from_parts(g, states, NormalizationMode::Binomial)?;
    let alpha = 0.5;
    let proposals = [
        (0, 1, Change::FlipSign),
        (2, 4, Change::FlipSign),
        (0, 1, Change::First(Alert)),
        (1, 3, Change::First(Susceptible)),
    ];
    let mut out = Vec::new();
    for (i, j, change) in proposals {
        let (dp, dt) = base.proposal_delta(i, j, change);
        let norm = base.normalizer();
        let before = base.energy(alpha).e_total;
        let incremental = alpha * norm.triad(dt) + (1.0 - alpha) * norm.pair(dp);
        let mut after = base.clone();
        let mut graph = after.graph().clone();
        let mut states = after.states().to_vec();
        match change {
            Change::FlipSign => graph.set_sign(i, j, graph.sign(i, j).flipped())?,
            Change::First(x) => states[i] = x,
            Change::Second(x) => states[j] = x,
        }
        after = NetworkState::from_parts(graph, states, NormalizationMode::Binomial)?;
        out.push((format!("({i},{j}) {change:?}"), incremental, after.recompute_energy(alpha).e_total - before));
    }
    Ok(out)
}

fn main() -> signet::Result<()> {
    for (label, inc, full) in run_example()? {
        println!("{label:<28} dE incremental {inc:+.6}  recomputed {full:+.6}");
    }
    Ok(())
}
