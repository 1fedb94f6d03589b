//! Monte Carlo co-evolution of node states and link signs.
//!
//! A [`NetworkState`] owns a graph, the per-node epidemic states and integer
//! running sums of the pairwise and triad energies. Each [`NetworkState::step`]
//! picks a uniformly random link, draws one transition for it and applies the
//! acceptance rule, updating the cached sums in time proportional to the
//! degrees involved.

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    accept_energy_change, AcceptanceGate, Change, EdgeConfig, EnergyDelta, GateScope, Params, TransitionKind,
    TransitionOutcome, TransitionTable,
};
use crate::energy::{
    self, node_state_pair_delta, pairwise_energy, EnergyBreakdown, NodeState, NormalizationMode, Normalizer,
};
use crate::error::{Error, Result};
use crate::graph::{NodeId, Sign, SignedGraph};

/// Random source used for every run. Seeded per run, so ensembles are
/// reproducible regardless of how runs are scheduled.
pub type RunRng = ChaCha8Rng;

pub fn rng_for(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Starting fractions and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConditions {
    /// Initial infected fraction.
    pub rho0: f64,
    /// Initial fraction of friendly links.
    pub r0: f64,
    /// Initial alert fraction.
    pub a0: f64,
    /// Keep the graph's own signs instead of drawing them from `r0`.
    pub native_signs: bool,
    pub seed: u64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions { rho0: 0.15, r0: 0.25, a0: 0.0, native_signs: false, seed: 0 }
    }
}

impl InitialConditions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho0", self.rho0), ("r0", self.r0), ("a0", self.a0)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInitialConditions(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.rho0 + self.a0 > 1.0 + 1e-12 {
            return Err(Error::InvalidInitialConditions(format!("rho0 + a0 = {} exceeds 1", self.rho0 + self.a0)));
        }
        Ok(())
    }
}

/// `round(x)` with halves rounded up.
fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Dynamic-rule switches that are not rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Rules {
    pub gate: AcceptanceGate,
    pub scope: GateScope,
    pub norm: NormalizationMode,
}

/// What happened to one proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceDecision {
    pub accepted: bool,
    pub kind: TransitionKind,
    /// Unnormalized change of the pairwise sum (zero when rejected).
    pub pair_sum_delta: i64,
    /// Unnormalized change of the triad sum (zero when rejected).
    pub triad_sum_delta: i64,
}

/// Joint state of graph signs and node states with cached energy sums.
#[derive(Debug, Clone)]
pub struct NetworkState {
    graph: SignedGraph,
    states: Vec<NodeState>,
    edges: Vec<(u32, u32)>,
    normalizer: Normalizer,
    pair_sum: i64,
    triad_sum: i64,
    triad_total: u64,
    counts: [usize; 3],
    positive: usize,
    step: u64,
}

#[inline]
fn slot(x: NodeState) -> usize {
    (x.value() + 1) as usize
}

impl NetworkState {
    /// Wraps an explicit graph and state assignment.
    pub fn from_parts(graph: SignedGraph, states: Vec<NodeState>, norm: NormalizationMode) -> Result<Self> {
        if states.len() != graph.node_count() {
            return Err(Error::InvalidInitialConditions(format!(
                "{} states for {} nodes",
                states.len(),
                graph.node_count()
            )));
        }
        let edges: Vec<(u32, u32)> = graph.edges().map(|(i, j, _)| (i as u32, j as u32)).collect();
        let triad_total = graph.triad_count();
        let normalizer = match norm {
            NormalizationMode::Binomial => Normalizer::binomial(graph.node_count()),
            NormalizationMode::Present => Normalizer { pair: edges.len() as f64, triad: triad_total as f64 },
        };
        let mut counts = [0; 3];
        for &x in &states {
            counts[slot(x)] += 1;
        }
        let pair_sum = energy::pair_energy_sum(&graph, &states);
        let triad_sum = energy::triad_energy_sum(&graph);
        let positive = graph.positive_edge_count();
        Ok(NetworkState {
            graph,
            states,
            edges,
            normalizer,
            pair_sum,
            triad_sum,
            triad_total,
            counts,
            positive,
            step: 0,
        })
    }

    /// Random initial states and signs on `graph`.
    ///
    /// Exactly `round(rho0·n)` nodes become infected and `round(a0·n)` alert
    /// (the alert count is floored if both together exceed `n`); exactly
    /// `round(r0·m)` links become friendly and the rest hostile, unless
    /// `native_signs` is set.
    pub fn initialize<R: Rng + ?Sized>(
        graph: &SignedGraph,
        ic: &InitialConditions,
        norm: NormalizationMode,
        rng: &mut R,
    ) -> Result<Self> {
        ic.validate()?;
        let n = graph.node_count();
        let infected = round_half_up(ic.rho0 * n as f64).min(n);
        let mut alert = round_half_up(ic.a0 * n as f64);
        if infected + alert > n {
            alert = ((ic.a0 * n as f64).floor() as usize).min(n - infected);
        }
        let mut states = vec![NodeState::Susceptible; n];
        let chosen = sample_indices(rng, n, infected + alert);
        for (k, v) in chosen.iter().enumerate() {
            states[v] = if k < infected { NodeState::Infected } else { NodeState::Alert };
        }

        let mut g = graph.clone();
        if !ic.native_signs {
            let edges: Vec<(NodeId, NodeId)> = g.edges().map(|(i, j, _)| (i, j)).collect();
            let m = edges.len();
            let positive = round_half_up(ic.r0 * m as f64).min(m);
            let mut signs = vec![Sign::Negative; m];
            for e in sample_indices(rng, m, positive).iter() {
                signs[e] = Sign::Positive;
            }
            for (&(i, j), &s) in edges.iter().zip(&signs) {
                g.set_sign(i, j, s)?;
            }
        }
        Self::from_parts(g, states, norm)
    }

    pub fn graph(&self) -> &SignedGraph {
        &self.graph
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn pair_sum(&self) -> i64 {
        self.pair_sum
    }

    pub fn triad_sum(&self) -> i64 {
        self.triad_sum
    }

    pub fn triad_total(&self) -> u64 {
        self.triad_total
    }

    pub fn link_count(&self) -> usize {
        self.edges.len()
    }

    pub fn count(&self, x: NodeState) -> usize {
        self.counts[slot(x)]
    }

    /// Fractions `(s, a, ρ)`.
    pub fn densities(&self) -> (f64, f64, f64) {
        let n = self.states.len().max(1) as f64;
        (
            self.count(NodeState::Susceptible) as f64 / n,
            self.count(NodeState::Alert) as f64 / n,
            self.count(NodeState::Infected) as f64 / n,
        )
    }

    /// Fraction of links that are friendly.
    pub fn friendly_fraction(&self) -> f64 {
        if self.edges.is_empty() {
            0.0
        } else {
            self.positive as f64 / self.edges.len() as f64
        }
    }

    /// Fraction of closed triads with a positive sign product.
    pub fn balanced_fraction(&self) -> f64 {
        if self.triad_total == 0 {
            return 1.0;
        }
        // triad_sum = unbalanced − balanced, triad_total = unbalanced + balanced
        let balanced = (self.triad_total as i64 - self.triad_sum) / 2;
        balanced as f64 / self.triad_total as f64
    }

    pub fn energy(&self, alpha: f64) -> EnergyBreakdown {
        EnergyBreakdown::new(self.normalizer.pair(self.pair_sum), self.normalizer.triad(self.triad_sum), alpha)
    }

    /// Energy recomputed from scratch, for checking the cached sums.
    pub fn recompute_energy(&self, alpha: f64) -> EnergyBreakdown {
        EnergyBreakdown::new(
            self.normalizer.pair(energy::pair_energy_sum(&self.graph, &self.states)),
            self.normalizer.triad(energy::triad_energy_sum(&self.graph)),
            alpha,
        )
    }

    /// Whether the cached sums match a full recomputation exactly.
    pub fn caches_consistent(&self) -> bool {
        self.pair_sum == energy::pair_energy_sum(&self.graph, &self.states)
            && self.triad_sum == energy::triad_energy_sum(&self.graph)
    }

    pub fn edge_config(&self, i: NodeId, j: NodeId) -> EdgeConfig {
        EdgeConfig::new(self.states[i], self.states[j], self.graph.sign(i, j))
    }

    /// Unnormalized energy change that `change` on `(i, j)` would cause.
    pub fn proposal_delta(&self, i: NodeId, j: NodeId, change: Change) -> (i64, i64) {
        match change {
            Change::FlipSign => {
                let s = self.graph.sign(i, j);
                let dpair = i64::from(
                    pairwise_energy(self.states[i], self.states[j], s.flipped())
                        - pairwise_energy(self.states[i], self.states[j], s),
                );
                let dtriad = 2 * i64::from(s.value()) * self.graph.common_sign_product_sum(i, j);
                (dpair, dtriad)
            }
            Change::First(x) => (node_state_pair_delta(&self.graph, &self.states, i, x), 0),
            Change::Second(x) => (node_state_pair_delta(&self.graph, &self.states, j, x), 0),
        }
    }

    fn commit(&mut self, i: NodeId, j: NodeId, change: Change, dpair: i64, dtriad: i64) {
        match change {
            Change::FlipSign => {
                if self.graph.sign(i, j) == Sign::Positive {
                    self.positive -= 1;
                } else {
                    self.positive += 1;
                }
                self.graph.flip_nonzero(i, j);
            }
            Change::First(x) => self.set_state(i, x),
            Change::Second(x) => self.set_state(j, x),
        }
        self.pair_sum += dpair;
        self.triad_sum += dtriad;
    }

    fn set_state(&mut self, u: NodeId, x: NodeState) {
        self.counts[slot(self.states[u])] -= 1;
        self.counts[slot(x)] += 1;
        self.states[u] = x;
    }

    /// Applies `outcome` to the link `(i, j)` subject to the acceptance rule.
    ///
    /// Gated proposals are accepted when the energy change is negative,
    /// rejected when positive and accepted with probability one half on a
    /// tie. Under [`GateScope::Flips`] epidemic changes bypass the gate.
    pub fn apply_with_acceptance<R: Rng + ?Sized>(
        &mut self,
        i: NodeId,
        j: NodeId,
        outcome: &TransitionOutcome,
        alpha: f64,
        rules: &Rules,
        rng: &mut R,
    ) -> AcceptanceDecision {
        let (dpair, dtriad) = self.proposal_delta(i, j, outcome.change);
        let gated = match (outcome.kind, rules.scope) {
            (TransitionKind::SignFlip, _) | (_, GateScope::All | GateScope::Pair) => rules.gate != AcceptanceGate::None,
            (TransitionKind::EpidemicChange, GateScope::Flips) => false,
        };
        let gate_dpair = match (outcome.kind, rules.scope) {
            (TransitionKind::EpidemicChange, GateScope::Pair) => {
                let before = self.edge_config(i, j);
                let after = before.apply(outcome.change);
                i64::from(
                    pairwise_energy(after.xi, after.xj, after.sign)
                        - pairwise_energy(before.xi, before.xj, before.sign),
                )
            }
            _ => dpair,
        };
        let accepted = if gated {
            let delta = match rules.gate {
                AcceptanceGate::Total => {
                    EnergyDelta { pair: self.normalizer.pair(gate_dpair), triad: self.normalizer.triad(dtriad), alpha }
                }
                AcceptanceGate::Triad => EnergyDelta { pair: 0.0, triad: self.normalizer.triad(dtriad), alpha: 1.0 },
                AcceptanceGate::None => unreachable!("ungated"),
            };
            accept_energy_change(delta, rng)
        } else {
            true
        };
        if accepted {
            self.commit(i, j, outcome.change, dpair, dtriad);
        }
        AcceptanceDecision {
            accepted,
            kind: outcome.kind,
            pair_sum_delta: if accepted { dpair } else { 0 },
            triad_sum_delta: if accepted { dtriad } else { 0 },
        }
    }

    /// One Monte Carlo step: uniform link choice, one proposal, acceptance.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        table: &TransitionTable,
        rules: &Rules,
        rng: &mut R,
    ) -> Option<AcceptanceDecision> {
        self.step += 1;
        if self.edges.is_empty() {
            return None;
        }
        let (i, j) = self.edges[rng.gen_range(0..self.edges.len())];
        let (i, j) = (i as NodeId, j as NodeId);
        let outcome = table.sample(self.edge_config(i, j), rng);
        Some(self.apply_with_acceptance(i, j, &outcome, table.params().alpha, rules, rng))
    }

    /// Components of the friendly-link subgraph and how hostile links sit
    /// relative to them.
    pub fn detect_clusters(&self) -> ClusterReport {
        let (label, count) = self.graph.components_where(|s| s == Sign::Positive);
        let mut components = vec![ComponentComposition::default(); count];
        for (u, &c) in label.iter().enumerate() {
            let comp = &mut components[c];
            comp.size += 1;
            match self.states[u] {
                NodeState::Susceptible => comp.susceptible += 1,
                NodeState::Alert => comp.alert += 1,
                NodeState::Infected => comp.infected += 1,
            }
        }
        let (mut neg, mut neg_cross, mut pos, mut pos_inside) = (0usize, 0usize, 0usize, 0usize);
        for &(i, j) in &self.edges {
            let same = label[i as usize] == label[j as usize];
            if self.graph.sign(i as usize, j as usize) == Sign::Negative {
                neg += 1;
                neg_cross += usize::from(!same);
            } else {
                pos += 1;
                pos_inside += usize::from(same);
            }
        }
        let frac = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
        components.sort_by_key(|c| std::cmp::Reverse(c.size));
        ClusterReport {
            count,
            components,
            negative_cross_fraction: frac(neg_cross, neg),
            positive_inside_fraction: frac(pos_inside, pos),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ComponentComposition {
    pub size: usize,
    pub susceptible: usize,
    pub alert: usize,
    pub infected: usize,
}

/// Friendly-link components and hostile-link consistency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub count: usize,
    /// Components sorted by decreasing size.
    pub components: Vec<ComponentComposition>,
    /// Share of hostile links whose endpoints lie in different components.
    pub negative_cross_fraction: f64,
    /// Share of friendly links inside a component.
    pub positive_inside_fraction: f64,
}

/// One recorded point of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub step: u64,
    pub t: f64,
    pub s: f64,
    pub a: f64,
    pub rho: f64,
    pub r: f64,
    pub e_pair: f64,
    pub e_triad: f64,
    pub e_total: f64,
    pub balanced_frac: f64,
    pub e_min: f64,
}

impl Sample {
    pub const FIELDS: [&'static str; 9] = ["s", "a", "rho", "r", "E_p", "E_tri", "E", "balanced_frac", "e_min"];

    pub fn values(&self) -> [f64; 9] {
        [self.s, self.a, self.rho, self.r, self.e_pair, self.e_triad, self.e_total, self.balanced_frac, self.e_min]
    }
}

/// Configuration for a single run or an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: Params,
    pub initial: InitialConditions,
    pub rules: Rules,
    pub steps: u64,
    pub sample_every: u64,
    /// Stop once the energy sums have not changed for this many steps; the
    /// remaining samples repeat the final state.
    pub stall_steps: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: Params::default(),
            initial: InitialConditions::default(),
            rules: Rules::default(),
            steps: 10_000_000,
            sample_every: 100,
            stall_steps: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.initial.validate()?;
        if self.steps == 0 {
            return Err(Error::Config("steps must be >= 1".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RunCounters {
    pub flips_accepted: u64,
    pub flips_rejected: u64,
    pub epidemic_accepted: u64,
    pub epidemic_rejected: u64,
}

/// Time series and summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub samples: Vec<Sample>,
    pub e_min: f64,
    pub final_energy: EnergyBreakdown,
    pub final_counts: [usize; 3],
    pub counters: RunCounters,
    /// Step at which the stall rule stopped the run, if it did.
    pub stopped_at: Option<u64>,
    pub clusters: ClusterReport,
}

impl RunRecord {
    /// Mean of each sampled quantity over the final tenth of the samples.
    pub fn steady_state(&self) -> Sample {
        tail_mean(&self.samples)
    }
}

/// Mean over the last 10% of samples (at least one).
pub fn tail_mean(samples: &[Sample]) -> Sample {
    assert!(!samples.is_empty(), "no samples recorded");
    let k = (samples.len() / 10).max(1);
    let tail = &samples[samples.len() - k..];
    let mut acc = [0.0; 9];
    for s in tail {
        for (a, v) in acc.iter_mut().zip(s.values()) {
            *a += v;
        }
    }
    let m = |idx: usize| acc[idx] / k as f64;
    let last = tail.last().expect("nonempty");
    Sample {
        step: last.step,
        t: last.t,
        s: m(0),
        a: m(1),
        rho: m(2),
        r: m(3),
        e_pair: m(4),
        e_triad: m(5),
        e_total: m(6),
        balanced_frac: m(7),
        e_min: m(8),
    }
}

fn snapshot(state: &NetworkState, alpha: f64, dt: f64, e_min: f64) -> Sample {
    let (s, a, rho) = state.densities();
    let e = state.energy(alpha);
    Sample {
        step: state.step,
        t: state.step as f64 * dt,
        s,
        a,
        rho,
        r: state.friendly_fraction(),
        e_pair: e.e_pair,
        e_triad: e.e_triad,
        e_total: e.e_total,
        balanced_frac: state.balanced_fraction(),
        e_min,
    }
}

/// Runs the dynamics from a given state, recording every `sample_every`
/// steps (and the initial state).
pub fn run_from<R: Rng + ?Sized>(
    mut state: NetworkState,
    cfg: &RunConfig,
    rng: &mut R,
) -> Result<(RunRecord, NetworkState)> {
    cfg.validate()?;
    let table = TransitionTable::new(&cfg.params)?;
    let alpha = cfg.params.alpha;
    let dt = cfg.params.dt;
    let mut e_min = state.energy(alpha).e_total;
    let mut samples = Vec::with_capacity((cfg.steps / cfg.sample_every + 1) as usize);
    samples.push(snapshot(&state, alpha, dt, e_min));
    let mut counters = RunCounters::default();
    let mut last_change = 0u64;
    let mut stopped_at = None;

    for k in 1..=cfg.steps {
        if let Some(d) = state.step(&table, &cfg.rules, rng) {
            match (d.kind, d.accepted) {
                (TransitionKind::SignFlip, true) => counters.flips_accepted += 1,
                (TransitionKind::SignFlip, false) => counters.flips_rejected += 1,
                (TransitionKind::EpidemicChange, true) => counters.epidemic_accepted += 1,
                (TransitionKind::EpidemicChange, false) => counters.epidemic_rejected += 1,
            }
            if d.pair_sum_delta != 0 || d.triad_sum_delta != 0 {
                last_change = k;
            }
        }
        let e = state.energy(alpha).e_total;
        if e == e_min {
            // Refresh on ties with probability one half; value-neutral.
            if rng.gen_bool(0.5) {
                e_min = e;
            }
        } else if e < e_min {
            e_min = e;
        }
        if k % cfg.sample_every == 0 {
            samples.push(snapshot(&state, alpha, dt, e_min));
        }
        if let Some(window) = cfg.stall_steps {
            if k - last_change >= window {
                stopped_at = Some(k);
                break;
            }
        }
    }

    if let Some(stop) = stopped_at {
        let frozen = snapshot(&state, alpha, dt, e_min);
        let mut next = (stop / cfg.sample_every + 1) * cfg.sample_every;
        while next <= cfg.steps {
            samples.push(Sample { step: next, t: next as f64 * dt, ..frozen });
            next += cfg.sample_every;
        }
    }

    let record = RunRecord {
        seed: cfg.initial.seed,
        samples,
        e_min,
        final_energy: state.energy(alpha),
        final_counts: [
            state.count(NodeState::Susceptible),
            state.count(NodeState::Alert),
            state.count(NodeState::Infected),
        ],
        counters,
        stopped_at,
        clusters: state.detect_clusters(),
    };
    Ok((record, state))
}

/// Initializes `graph` from `cfg.initial` and runs it, seeded by
/// `cfg.initial.seed`.
pub fn run(graph: &SignedGraph, cfg: &RunConfig) -> Result<RunRecord> {
    run_with_state(graph, cfg).map(|(rec, _)| rec)
}

/// Like [`run`], also returning the final state.
pub fn run_with_state(graph: &SignedGraph, cfg: &RunConfig) -> Result<(RunRecord, NetworkState)> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.initial.seed);
    let state = NetworkState::initialize(graph, &cfg.initial, cfg.rules.norm, &mut rng)?;
    run_from(state, cfg, &mut rng)
}

/// Pointwise mean and standard deviation across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub runs: usize,
    pub steps: Vec<u64>,
    pub times: Vec<f64>,
    /// `mean[k][q]` for sample `k` and quantity `q` in [`Sample::FIELDS`] order.
    pub mean: Vec<[f64; 9]>,
    /// Population standard deviation, same layout as `mean`.
    pub std: Vec<[f64; 9]>,
    /// Per-run steady-state values (tail means).
    pub steady: Vec<Sample>,
    pub e_min: Vec<f64>,
}

impl EnsembleStats {
    pub fn from_records(records: &[RunRecord]) -> Result<Self> {
        let mut acc = EnsembleAccumulator::default();
        for rec in records {
            acc.push(rec)?;
        }
        acc.finish()
    }

    /// Mean across runs of the per-run steady-state values.
    pub fn steady_mean(&self) -> Sample {
        let mut acc = [0.0; 9];
        for s in &self.steady {
            for (a, v) in acc.iter_mut().zip(s.values()) {
                *a += v;
            }
        }
        let n = self.steady.len() as f64;
        let last = self.steady.last().expect("at least one run");
        Sample {
            step: last.step,
            t: last.t,
            s: acc[0] / n,
            a: acc[1] / n,
            rho: acc[2] / n,
            r: acc[3] / n,
            e_pair: acc[4] / n,
            e_triad: acc[5] / n,
            e_total: acc[6] / n,
            balanced_frac: acc[7] / n,
            e_min: acc[8] / n,
        }
    }
}

/// Running pointwise mean and variance over runs (Welford), fed in a fixed
/// order so results do not depend on scheduling.
#[derive(Debug, Clone, Default)]
pub struct EnsembleAccumulator {
    n: usize,
    steps: Vec<u64>,
    times: Vec<f64>,
    mean: Vec<[f64; 9]>,
    m2: Vec<[f64; 9]>,
    steady: Vec<Sample>,
    e_min: Vec<f64>,
}

impl EnsembleAccumulator {
    pub fn push(&mut self, rec: &RunRecord) -> Result<()> {
        if self.n == 0 {
            self.steps = rec.samples.iter().map(|s| s.step).collect();
            self.times = rec.samples.iter().map(|s| s.t).collect();
            self.mean = vec![[0.0; 9]; rec.samples.len()];
            self.m2 = vec![[0.0; 9]; rec.samples.len()];
        } else if rec.samples.len() != self.mean.len() {
            return Err(Error::Config("runs recorded different sample counts".into()));
        }
        self.n += 1;
        let n = self.n as f64;
        for (k, sample) in rec.samples.iter().enumerate() {
            for (q, v) in sample.values().into_iter().enumerate() {
                let d = v - self.mean[k][q];
                self.mean[k][q] += d / n;
                self.m2[k][q] += d * (v - self.mean[k][q]);
            }
        }
        self.steady.push(rec.steady_state());
        self.e_min.push(rec.e_min);
        Ok(())
    }

    pub fn finish(self) -> Result<EnsembleStats> {
        if self.n == 0 {
            return Err(Error::Config("ensemble needs at least one run".into()));
        }
        let n = self.n as f64;
        let std = self.m2.iter().map(|row| row.map(|m| (m / n).max(0.0).sqrt())).collect();
        Ok(EnsembleStats {
            runs: self.n,
            steps: self.steps,
            times: self.times,
            mean: self.mean,
            std,
            steady: self.steady,
            e_min: self.e_min,
        })
    }
}

/// Runs an ensemble in batches of the thread-pool width, handing each record
/// to `each` in seed order before it is dropped.
pub fn run_ensemble_with<F, G>(make_graph: F, cfg: &RunConfig, runs: usize, mut each: G) -> Result<EnsembleStats>
where
    F: Fn(u64) -> Result<SignedGraph> + Sync,
    G: FnMut(&RunRecord),
{
    if runs == 0 {
        return Err(Error::Config("runs must be >= 1".into()));
    }
    cfg.validate()?;
    let batch = rayon::current_num_threads().max(1);
    let mut acc = EnsembleAccumulator::default();
    for start in (0..runs).step_by(batch) {
        let end = (start + batch).min(runs);
        let records: Vec<Result<RunRecord>> = (start as u64..end as u64)
            .into_par_iter()
            .map(|i| {
                let mut c = cfg.clone();
                c.initial.seed = cfg.initial.seed.wrapping_add(i);
                run(&make_graph(c.initial.seed)?, &c)
            })
            .collect();
        for rec in records {
            let rec = rec?;
            each(&rec);
            acc.push(&rec)?;
        }
    }
    acc.finish()
}

/// Runs `runs` independent copies with seeds `base_seed + i`, in parallel,
/// returning records in seed order.
pub fn run_records<F>(make_graph: F, cfg: &RunConfig, runs: usize) -> Result<Vec<RunRecord>>
where
    F: Fn(u64) -> Result<SignedGraph> + Sync,
{
    if runs == 0 {
        return Err(Error::Config("runs must be >= 1".into()));
    }
    cfg.validate()?;
    (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.initial.seed = cfg.initial.seed.wrapping_add(i);
            let g = make_graph(c.initial.seed)?;
            run(&g, &c)
        })
        .collect()
}

/// Ensemble over a fixed graph.
pub fn run_ensemble(graph: &SignedGraph, cfg: &RunConfig, runs: usize) -> Result<EnsembleStats> {
    run_ensemble_with(|_| Ok(graph.clone()), cfg, runs, |_| {})
}
