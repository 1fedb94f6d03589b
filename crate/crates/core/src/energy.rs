//! Pairwise spreading energy, triad structural energy and their weighted sum.
//!
//! Node states are encoded as `X = 1` (susceptible), `0` (alert) and `−1`
//! (infected). A pair `(i, j)` with sign `a` carries the pairwise energy
//!
//! ```text
//! a · (X_i − X_j)² / 4     if |X_i + X_j| is even
//! a · (1 − X_i − X_j) / 2  otherwise
//! ```
//!
//! which is `+1` for the transmissible links `S+I` and `A+I`, `−1` for their
//! hostile counterparts and `0` for everything else. A closed triad carries
//! `−a_ij · a_jk · a_ki`. Network energies are normalized sums over unordered
//! pairs and triples; the engine keeps the integer sums and normalizes on read.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, Sign, SignedGraph};

/// Epidemic state of a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum NodeState {
    Infected = -1,
    Alert = 0,
    Susceptible = 1,
}

impl NodeState {
    pub const ALL: [NodeState; 3] = [NodeState::Susceptible, NodeState::Alert, NodeState::Infected];

    /// Numeric encoding `X ∈ {1, 0, −1}`.
    #[inline]
    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn from_value(x: i8) -> Option<NodeState> {
        match x {
            1 => Some(NodeState::Susceptible),
            0 => Some(NodeState::Alert),
            -1 => Some(NodeState::Infected),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            NodeState::Susceptible => 'S',
            NodeState::Alert => 'A',
            NodeState::Infected => 'I',
        }
    }
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Classification of a linked pair by its pairwise energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    /// `S−I`, `A−I`: the hostile sign blocks transmission (energy −1).
    Balanced,
    /// `S+I`, `A+I`: transmissible (energy +1).
    Unbalanced,
    /// Every other configuration (energy 0).
    Neutral,
}

impl EdgeClass {
    pub fn classify(xi: NodeState, xj: NodeState, a: Sign) -> EdgeClass {
        match pairwise_energy(xi, xj, a) {
            -1 => EdgeClass::Balanced,
            1 => EdgeClass::Unbalanced,
            _ => EdgeClass::Neutral,
        }
    }
}

/// Denominator used to turn energy sums into network energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// Divide by `C(n,2)` and `C(n,3)`.
    #[default]
    Binomial,
    /// Divide by the number of linked pairs and closed triads.
    #[serde(alias = "present_count")]
    Present,
}

impl std::str::FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(NormalizationMode::Binomial),
            "present" => Ok(NormalizationMode::Present),
            other => Err(Error::Config(format!("unknown normalization `{other}`"))),
        }
    }
}

/// Resolved denominators for a particular graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub pair: f64,
    pub triad: f64,
}

impl Normalizer {
    pub fn resolve(mode: NormalizationMode, g: &SignedGraph) -> Normalizer {
        match mode {
            NormalizationMode::Binomial => Self::binomial(g.node_count()),
            NormalizationMode::Present => Normalizer { pair: g.edge_count() as f64, triad: g.triad_count() as f64 },
        }
    }

    pub fn binomial(n: usize) -> Normalizer {
        Normalizer { pair: binomial(n as u64, 2), triad: binomial(n as u64, 3) }
    }

    #[inline]
    pub fn pair(&self, sum: i64) -> f64 {
        if self.pair > 0.0 {
            sum as f64 / self.pair
        } else {
            0.0
        }
    }

    #[inline]
    pub fn triad(&self, sum: i64) -> f64 {
        if self.triad > 0.0 {
            sum as f64 / self.triad
        } else {
            0.0
        }
    }
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Pairwise and triad energies and their weighted combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub e_pair: f64,
    pub e_triad: f64,
    pub e_total: f64,
    pub alpha: f64,
}

impl EnergyBreakdown {
    pub fn new(e_pair: f64, e_triad: f64, alpha: f64) -> Self {
        EnergyBreakdown { e_pair, e_triad, e_total: weighted(e_triad, e_pair, alpha), alpha }
    }
}

#[inline]
fn weighted(triad: f64, pair: f64, alpha: f64) -> f64 {
    alpha * triad + (1.0 - alpha) * pair
}

/// Spreading energy of one pair. A zero sign yields 0.
#[inline]
pub fn pairwise_energy(xi: NodeState, xj: NodeState, a: Sign) -> i8 {
    let (xi, xj) = (xi.value(), xj.value());
    let magnitude = if (xi + xj).abs() % 2 == 0 { (xi - xj) * (xi - xj) / 4 } else { (1 - xi - xj) / 2 };
    a.value() * magnitude
}

/// Unnormalized `Σ E^p` over linked unordered pairs.
pub fn pair_energy_sum(g: &SignedGraph, states: &[NodeState]) -> i64 {
    assert_eq!(states.len(), g.node_count(), "one state per node required");
    g.edges().map(|(i, j, s)| i64::from(pairwise_energy(states[i], states[j], s))).sum()
}

pub fn total_pairwise_energy(g: &SignedGraph, states: &[NodeState], norm: NormalizationMode) -> f64 {
    Normalizer::resolve(norm, g).pair(pair_energy_sum(g, states))
}

/// Structural energy of a closed triad: −1 when balanced, +1 when not.
pub fn triad_energy(a_ij: Sign, a_jk: Sign, a_ki: Sign) -> Result<i8> {
    if a_ij.is_zero() || a_jk.is_zero() || a_ki.is_zero() {
        return Err(Error::OpenTriad);
    }
    Ok(-(a_ij.value() * a_jk.value() * a_ki.value()))
}

/// Unnormalized `Σ E^▲` over closed triads.
pub fn triad_energy_sum(g: &SignedGraph) -> i64 {
    g.triads().map(|(i, j, k)| -i64::from(g.sign(i, j).value() * g.sign(j, k).value() * g.sign(k, i).value())).sum()
}

pub fn total_triad_energy(g: &SignedGraph, norm: NormalizationMode) -> f64 {
    Normalizer::resolve(norm, g).triad(triad_energy_sum(g))
}

pub fn total_energy(g: &SignedGraph, states: &[NodeState], alpha: f64, norm: NormalizationMode) -> EnergyBreakdown {
    let normalizer = Normalizer::resolve(norm, g);
    EnergyBreakdown::new(normalizer.pair(pair_energy_sum(g, states)), normalizer.triad(triad_energy_sum(g)), alpha)
}

/// Unnormalized triad-energy change when `(i, j)` goes from `old` to `new`.
/// The graph must still hold `old`.
pub fn triad_sum_delta(g: &SignedGraph, i: NodeId, j: NodeId, old: Sign, new: Sign) -> Result<i64> {
    if old.is_zero() || new.is_zero() {
        return Err(Error::NotAFlip { from: old.value(), to: new.value() });
    }
    if old == new {
        return Ok(0);
    }
    Ok(-2 * i64::from(new.value()) * g.common_sign_product_sum(i, j))
}

/// Normalized triad-energy change for flipping `(i, j)` from `old` to `new`.
pub fn delta_triad_energy(
    g: &SignedGraph,
    i: NodeId,
    j: NodeId,
    old: Sign,
    new: Sign,
    normalizer: &Normalizer,
) -> Result<f64> {
    Ok(normalizer.triad(triad_sum_delta(g, i, j, old, new)?))
}

/// One side of a pair transition: both endpoint states and the link sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSnapshot {
    pub xi: NodeState,
    pub xj: NodeState,
    pub sign: Sign,
}

impl PairSnapshot {
    pub fn energy(&self) -> i8 {
        pairwise_energy(self.xi, self.xj, self.sign)
    }
}

/// Normalized pairwise-energy change of the selected pair only.
pub fn delta_pairwise_energy(before: PairSnapshot, after: PairSnapshot, normalizer: &Normalizer) -> f64 {
    normalizer.pair(i64::from(after.energy()) - i64::from(before.energy()))
}

pub fn delta_total_energy(dtriad: f64, dpair: f64, alpha: f64) -> f64 {
    weighted(dtriad, dpair, alpha)
}

/// Unnormalized pairwise-energy change over every link incident to `u` when
/// its state changes to `to`.
pub fn node_state_pair_delta(g: &SignedGraph, states: &[NodeState], u: NodeId, to: NodeState) -> i64 {
    let from = states[u];
    if from == to {
        return 0;
    }
    g.neighbors(u)
        .iter()
        .map(|&k| {
            let s = g.sign(u, k);
            i64::from(pairwise_energy(to, states[k], s) - pairwise_energy(from, states[k], s))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use NodeState::*;

    const P: Sign = Sign::Positive;
    const N: Sign = Sign::Negative;

    #[test]
    fn encoding_round_trips() {
        for x in NodeState::ALL {
            assert_eq!(NodeState::from_value(x.value()), Some(x));
        }
        assert_eq!(Susceptible.value(), 1);
        assert_eq!(Alert.value(), 0);
        assert_eq!(Infected.value(), -1);
    }

    #[test]
    fn pairwise_examples() {
        assert_eq!(pairwise_energy(Susceptible, Infected, P), 1);
        assert_eq!(pairwise_energy(Alert, Infected, N), -1);
        assert_eq!(pairwise_energy(Alert, Alert, P), 0);
        assert_eq!(pairwise_energy(Susceptible, Alert, N), 0);
        assert_eq!(pairwise_energy(Susceptible, Infected, Sign::Zero), 0);
    }

    #[test]
    fn all_twelve_configurations_classified() {
        for xi in NodeState::ALL {
            for xj in NodeState::ALL {
                for a in [P, N] {
                    let involves_infected_once = (xi == Infected) != (xj == Infected);
                    let expected = match (involves_infected_once, a) {
                        (true, Sign::Positive) => EdgeClass::Unbalanced,
                        (true, _) => EdgeClass::Balanced,
                        (false, _) => EdgeClass::Neutral,
                    };
                    assert_eq!(EdgeClass::classify(xi, xj, a), expected, "{xi}{a}{xj}");
                    assert_eq!(pairwise_energy(xi, xj, a), pairwise_energy(xj, xi, a));
                }
            }
        }
    }

    #[test]
    fn total_pairwise_examples() {
        let g = SignedGraph::complete(2, P);
        assert_eq!(total_pairwise_energy(&g, &[Susceptible, Infected], NormalizationMode::Binomial), 1.0);

        let g = SignedGraph::complete(5, N);
        assert_eq!(total_pairwise_energy(&g, &[Susceptible; 5], NormalizationMode::Binomial), 0.0);

        let g = SignedGraph::complete(3, P);
        let e = total_pairwise_energy(&g, &[Susceptible, Infected, Infected], NormalizationMode::Binomial);
        assert!((e - 2.0 / 3.0).abs() < 1e-15);

        let empty = SignedGraph::new(4);
        assert_eq!(total_pairwise_energy(&empty, &[Infected; 4], NormalizationMode::Present), 0.0);
    }

    #[test]
    fn triad_examples() {
        assert_eq!(triad_energy(P, P, P).unwrap(), -1);
        assert_eq!(triad_energy(P, P, N).unwrap(), 1);
        assert_eq!(triad_energy(N, N, P).unwrap(), -1);
        assert!(triad_energy(P, Sign::Zero, P).is_err());

        let g = SignedGraph::complete(4, P);
        assert_eq!(total_triad_energy(&g, NormalizationMode::Binomial), -1.0);

        let mut g = SignedGraph::complete(3, P);
        g.set_sign(0, 1, N).unwrap();
        assert_eq!(total_triad_energy(&g, NormalizationMode::Binomial), 1.0);

        let mut g = SignedGraph::complete(4, P);
        g.set_sign(0, 1, N).unwrap();
        assert_eq!(total_triad_energy(&g, NormalizationMode::Binomial), 0.0);

        assert_eq!(total_triad_energy(&SignedGraph::new(5), NormalizationMode::Present), 0.0);
    }

    #[test]
    fn total_energy_weights() {
        let mut g = SignedGraph::complete(4, P);
        g.set_sign(0, 1, N).unwrap();
        let states = [Susceptible, Infected, Alert, Infected];
        let b = total_energy(&g, &states, 1.0, NormalizationMode::Binomial);
        assert_eq!(b.e_total, b.e_triad);
        let b = total_energy(&g, &states, 0.0, NormalizationMode::Binomial);
        assert_eq!(b.e_total, b.e_pair);

        let balanced = SignedGraph::complete(6, P);
        let b = total_energy(&balanced, &[Alert; 6], 0.5, NormalizationMode::Binomial);
        assert_eq!(b.e_triad, -1.0);
        assert_eq!(b.e_pair, 0.0);
        let b = total_energy(&balanced, &[Alert; 6], 1.0, NormalizationMode::Binomial);
        assert_eq!(b.e_total, -1.0);
    }

    #[test]
    fn delta_triad_examples() {
        let g = SignedGraph::complete(4, P);
        let norm = Normalizer::binomial(4);
        let d = delta_triad_energy(&g, 0, 1, P, N, &norm).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(delta_triad_energy(&g, 0, 1, P, P, &norm).unwrap(), 0.0);
        assert!(delta_triad_energy(&g, 0, 1, P, Sign::Zero, &norm).is_err());

        let mut h = g.clone();
        h.set_sign(0, 1, N).unwrap();
        let back = delta_triad_energy(&h, 0, 1, N, P, &norm).unwrap();
        assert_eq!(d + back, 0.0);
    }

    #[test]
    fn delta_pairwise_examples() {
        let norm = Normalizer::binomial(2);
        let snap = |xi, xj, sign| PairSnapshot { xi, xj, sign };
        assert_eq!(delta_pairwise_energy(snap(Susceptible, Infected, P), snap(Infected, Infected, P), &norm), -1.0);
        assert_eq!(delta_pairwise_energy(snap(Susceptible, Infected, N), snap(Susceptible, Infected, P), &norm), 2.0);
        assert_eq!(
            delta_pairwise_energy(snap(Susceptible, Susceptible, P), snap(Susceptible, Susceptible, N), &norm),
            0.0
        );
    }

    #[test]
    fn delta_total_examples() {
        assert_eq!(delta_total_energy(1.0, 2.0, 0.5), 1.5);
        assert_eq!(delta_total_energy(0.3, 7.0, 1.0), 0.3);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(180, 2), 16110.0);
        assert_eq!(binomial(180, 3), 955860.0);
        assert_eq!(binomial(2, 3), 0.0);
    }
}
