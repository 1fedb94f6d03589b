//! Brute-force reference energies, written from the definitions without
//! touching the crate's energy code.

#![allow(dead_code)]

use rand::Rng;
use signet::dynamics::{AcceptanceGate, GateScope, Params, TransitionTable};
use signet::energy::{NodeState, NormalizationMode};
use signet::engine::{rng_for, NetworkState, Rules};
use signet::graph::{Sign, SignedGraph};

pub fn x(s: NodeState) -> i64 {
    match s {
        NodeState::Susceptible => 1,
        NodeState::Alert => 0,
        NodeState::Infected => -1,
    }
}

/// Pair term: `a(x_i − x_j)²/4` when `x_i + x_j` is even, else `a(1 − x_i − x_j)/2`.
pub fn pair_term(xi: i64, xj: i64, a: i64) -> f64 {
    if (xi + xj).abs() % 2 == 0 {
        (a * (xi - xj) * (xi - xj)) as f64 / 4.0
    } else {
        (a * (1 - xi - xj)) as f64 / 2.0
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Norm {
    Binomial,
    Present,
}

/// `(E_p, E_tri)` by enumerating all pairs and triples.
pub fn oracle_energies(g: &SignedGraph, states: &[NodeState], norm: Norm) -> (f64, f64) {
    let n = g.node_count();
    let a = |i: usize, j: usize| i64::from(g.sign(i, j).value());
    let (mut pair, mut links) = (0.0, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            if a(i, j) != 0 {
                pair += pair_term(x(states[i]), x(states[j]), a(i, j));
                links += 1;
            }
        }
    }
    let (mut tri, mut closed) = (0i64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let p = a(i, j) * a(j, k) * a(i, k);
                if p != 0 {
                    tri -= p;
                    closed += 1;
                }
            }
        }
    }
    let (dp, dt) = match norm {
        Norm::Binomial => {
            let n = n as f64;
            (n * (n - 1.0) / 2.0, n * (n - 1.0) * (n - 2.0) / 6.0)
        }
        Norm::Present => (links as f64, closed as f64),
    };
    let div = |v: f64, d: f64| if d > 0.0 { v / d } else { 0.0 };
    (div(pair, dp), div(tri as f64, dt))
}

/// Random signed graph with link probability `density` and random states.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, density: f64) -> (SignedGraph, Vec<NodeState>) {
    let mut g = SignedGraph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                let s = if rng.gen_bool(0.5) { Sign::Positive } else { Sign::Negative };
                g.set_sign(i, j, s).unwrap();
            }
        }
    }
    let states = (0..n).map(|_| NodeState::ALL[rng.gen_range(0..3)]).collect();
    (g, states)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OracleReport {
    pub accepted: usize,
    pub graphs: usize,
    /// Largest disagreement between cached and recomputed energies.
    pub max_total_err: f64,
    /// Largest disagreement between a reported delta and the recomputed
    /// before/after difference.
    pub max_delta_err: f64,
}

/// Drives random graphs (`n` in 5..=30) through accepted transitions until
/// `target` have been checked against [`oracle_energies`].
pub fn delta_oracle_run(seed: u64, target: usize) -> OracleReport {
    let mut rng = rng_for(seed);
    let mut rep = OracleReport::default();
    let params = Params { beta: 6.0, beta_a: 1.8, kappa: 4.0, delta: 9.0, dt: 0.02, alpha: 0.5 };
    let gates = [AcceptanceGate::Total, AcceptanceGate::Triad, AcceptanceGate::None];
    let scopes = [GateScope::Flips, GateScope::All];
    while rep.accepted < target {
        let n = rng.gen_range(5..=30);
        let density = rng.gen_range(0.3..=1.0);
        let (g, states) = random_instance(&mut rng, n, density);
        if g.edge_count() == 0 {
            continue;
        }
        let (mode, norm) = if rng.gen_bool(0.5) {
            (NormalizationMode::Binomial, Norm::Binomial)
        } else {
            (NormalizationMode::Present, Norm::Present)
        };
        let alpha = rng.gen_range(0.0..=1.0);
        let p = Params { alpha, ..params };
        let table = TransitionTable::new(&p).unwrap();
        let rules = Rules { gate: gates[rng.gen_range(0..3)], scope: scopes[rng.gen_range(0..2)], norm: mode };
        let mut st = NetworkState::from_parts(g, states, mode).unwrap();
        rep.graphs += 1;
        let mut before = oracle_energies(st.graph(), st.states(), norm);
        for _ in 0..200 {
            let Some(d) = st.step(&table, &rules, &mut rng) else { break };
            if !d.accepted {
                continue;
            }
            let after = oracle_energies(st.graph(), st.states(), norm);
            let cached = st.energy(alpha);
            let total = alpha * after.1 + (1.0 - alpha) * after.0;
            let err = (cached.e_pair - after.0)
                .abs()
                .max((cached.e_triad - after.1).abs())
                .max((cached.e_total - total).abs());
            rep.max_total_err = rep.max_total_err.max(err);
            let dp = st.normalizer().pair(d.pair_sum_delta);
            let dt = st.normalizer().triad(d.triad_sum_delta);
            let derr = (dp - (after.0 - before.0)).abs().max((dt - (after.1 - before.1)).abs());
            rep.max_delta_err = rep.max_delta_err.max(derr);
            before = after;
            rep.accepted += 1;
            if rep.accepted >= target {
                break;
            }
        }
    }
    rep
}
