//! Per-link transition rules and the energy-gated acceptance of proposals.
//!
//! Each step of the dynamics looks at one linked pair `(X_i, X_j, a_ij)` and
//! draws exactly one event from a table that depends on the pair's
//! configuration: either one endpoint changes its epidemic state, or the sign
//! flips. The probabilities are quadratic polynomials in the step width `Δt`;
//! they are kept in that form so that normalization can be checked
//! coefficient by coefficient and the small-`Δt` limits can be read off.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energy::NodeState;
use crate::error::{Error, Result};
use crate::graph::Sign;

/// Rates and weights driving the coupled dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Infection rate of susceptible users.
    pub beta: f64,
    /// Infection rate of alert users.
    pub beta_a: f64,
    /// Alerting rate.
    pub kappa: f64,
    /// Recovery rate.
    pub delta: f64,
    /// Step width.
    pub dt: f64,
    /// Weight of the triad energy in the total energy.
    pub alpha: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { beta: 6.0, beta_a: 1.8, kappa: 4.0, delta: 9.0, dt: 0.001, alpha: 0.5 }
    }
}

impl Params {
    /// Validates rate signs, `β_a < β`, `α ∈ [0, 1]` and that every transition
    /// probability lies in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let finite =
            [self.beta, self.beta_a, self.kappa, self.delta, self.dt, self.alpha].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.beta < 0.0 || self.beta_a < 0.0 || self.kappa < 0.0 {
            return Err(Error::InvalidParams("rates beta, beta_a, kappa must be >= 0".into()));
        }
        if self.delta <= 0.0 {
            return Err(Error::InvalidParams("recovery rate delta must be > 0".into()));
        }
        if self.dt <= 0.0 {
            return Err(Error::InvalidParams("time step dt must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParams(format!("alpha = {} outside [0, 1]", self.alpha)));
        }
        if self.beta > 0.0 && self.beta_a >= self.beta {
            return Err(Error::InvalidParams(format!(
                "alert infection rate beta_a = {} must be below beta = {}",
                self.beta_a, self.beta
            )));
        }
        if self.beta == 0.0 && self.beta_a > 0.0 {
            return Err(Error::InvalidParams("beta_a must be 0 when beta is 0".into()));
        }
        for rule in rules(self) {
            for o in rule.outcomes {
                let p = o.poly.eval(self.dt);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::ProbabilityOutOfRange { expr: o.expr.to_string(), value: p });
                }
            }
        }
        Ok(())
    }

    /// `β_a = ratio · β`.
    pub fn with_alert_ratio(mut self, ratio: f64) -> Self {
        self.beta_a = ratio * self.beta;
        self
    }
}

/// Quadratic polynomial `c0 + c1·Δt + c2·Δt²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly(pub [f64; 3]);

impl Poly {
    pub const ONE: Poly = Poly([1.0, 0.0, 0.0]);

    /// `rate · Δt`.
    pub fn rate(rate: f64) -> Poly {
        Poly([0.0, rate, 0.0])
    }

    pub fn eval(&self, dt: f64) -> f64 {
        let [c0, c1, c2] = self.0;
        c0 + dt * (c1 + dt * c2)
    }

    pub fn coefficients(&self) -> [f64; 3] {
        self.0
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        Poly([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        Poly([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

/// Truncated product; the table never produces terms above `Δt²`.
impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        debug_assert!(a1 * b2 == 0.0 && a2 * b1 == 0.0 && a2 * b2 == 0.0);
        Poly([a0 * b0, a0 * b1 + a1 * b0, a0 * b2 + a1 * b1 + a2 * b0])
    }
}

impl Mul<f64> for Poly {
    type Output = Poly;
    fn mul(self, k: f64) -> Poly {
        Poly([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
}

/// Endpoint states and sign of a linked pair, in a fixed `(i, j)` orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeConfig {
    pub xi: NodeState,
    pub xj: NodeState,
    pub sign: Sign,
}

impl EdgeConfig {
    pub fn new(xi: NodeState, xj: NodeState, sign: Sign) -> Self {
        EdgeConfig { xi, xj, sign }
    }

    /// Index `9(x+1) + 3(y+1) + (z+1)` in the 27-state pair space.
    #[inline]
    pub fn index(&self) -> usize {
        (9 * (self.xi.value() + 1) + 3 * (self.xj.value() + 1) + (self.sign.value() + 1)) as usize
    }

    pub fn from_index(idx: usize) -> Option<EdgeConfig> {
        if idx >= 27 {
            return None;
        }
        let x = NodeState::from_value(idx as i8 / 9 - 1)?;
        let y = NodeState::from_value((idx as i8 / 3) % 3 - 1)?;
        let z = Sign::try_from(i64::from((idx % 3) as i8 - 1)).ok()?;
        Some(EdgeConfig::new(x, y, z))
    }

    pub fn apply(&self, change: Change) -> EdgeConfig {
        match change {
            Change::FlipSign => EdgeConfig { sign: self.sign.flipped(), ..*self },
            Change::First(x) => EdgeConfig { xi: x, ..*self },
            Change::Second(x) => EdgeConfig { xj: x, ..*self },
        }
    }

    fn mirrored(&self) -> EdgeConfig {
        EdgeConfig { xi: self.xj, xj: self.xi, sign: self.sign }
    }

    /// The twelve unordered configurations with a nonzero sign.
    pub fn unordered_linked() -> Vec<EdgeConfig> {
        let order = [NodeState::Susceptible, NodeState::Alert, NodeState::Infected];
        let mut out = Vec::with_capacity(12);
        for (a, &x) in order.iter().enumerate() {
            for &y in &order[a..] {
                for s in [Sign::Positive, Sign::Negative] {
                    out.push(EdgeConfig::new(x, y, s));
                }
            }
        }
        out
    }
}

impl fmt::Display for EdgeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.xi, self.sign, self.xj)
    }
}

/// What a transition changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Change {
    FlipSign,
    /// The `i` endpoint moves to the given state.
    First(NodeState),
    /// The `j` endpoint moves to the given state.
    Second(NodeState),
}

impl Change {
    fn mirrored(self) -> Change {
        match self {
            Change::FlipSign => Change::FlipSign,
            Change::First(x) => Change::Second(x),
            Change::Second(x) => Change::First(x),
        }
    }

    pub fn kind(self) -> TransitionKind {
        match self {
            Change::FlipSign => TransitionKind::SignFlip,
            _ => TransitionKind::EpidemicChange,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    EpidemicChange,
    SignFlip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionOutcome {
    pub target: EdgeConfig,
    pub change: Change,
    pub probability: f64,
    pub kind: TransitionKind,
}

/// Symbolic outcome of a rule: the change, its probability polynomial and a
/// printable form of the expression.
#[derive(Debug, Clone, Copy)]
pub struct RuleOutcome {
    pub change: Change,
    pub poly: Poly,
    pub expr: &'static str,
}

/// All outcomes for one canonical source configuration.
#[derive(Debug, Clone)]
pub struct Rule {
    pub source: EdgeConfig,
    pub outcomes: Vec<RuleOutcome>,
}

fn rank(x: NodeState) -> u8 {
    match x {
        NodeState::Susceptible => 0,
        NodeState::Alert => 1,
        NodeState::Infected => 2,
    }
}

/// Symbolic rules for the twelve canonical configurations (endpoint states
/// ordered S < A < I).
pub fn rules(p: &Params) -> Vec<Rule> {
    use NodeState::{Alert as A, Infected as I, Susceptible as S};
    use Sign::{Negative as Neg, Positive as Pos};

    let one = Poly::ONE;
    let d = Poly::rate(p.delta);
    let b = Poly::rate(p.beta);
    let ba = Poly::rate(p.beta_a);
    let k = Poly::rate(p.kappa);
    let flip = |poly, expr| RuleOutcome { change: Change::FlipSign, poly, expr };
    let first = |x, poly, expr| RuleOutcome { change: Change::First(x), poly, expr };
    let second = |x, poly, expr| RuleOutcome { change: Change::Second(x), poly, expr };
    let rule = |xi, xj, s, outcomes| Rule { source: EdgeConfig::new(xi, xj, s), outcomes };

    vec![
        rule(S, S, Pos, vec![flip(one, "1")]),
        rule(S, S, Neg, vec![flip(one, "1")]),
        rule(A, A, Pos, vec![flip(one, "1")]),
        rule(A, A, Neg, vec![flip(one, "1")]),
        rule(S, A, Neg, vec![flip(one, "1")]),
        rule(
            S,
            A,
            Pos,
            vec![
                flip(one - k * (one - ba), "1 - kappa*dt*(1 - beta_a*dt)"),
                first(A, k * (one - ba), "kappa*dt*(1 - beta_a*dt)"),
            ],
        ),
        rule(S, I, Neg, vec![second(S, d, "delta*dt"), flip(one - d, "1 - delta*dt")]),
        rule(A, I, Neg, vec![second(S, d, "delta*dt"), flip(one - d, "1 - delta*dt")]),
        rule(
            S,
            I,
            Pos,
            vec![
                flip(one - d - (b + k) * (one - d * 2.0), "1 - delta*dt - (beta + kappa)*dt*(1 - 2*delta*dt)"),
                first(A, k * (one - d), "kappa*dt*(1 - delta*dt)"),
                first(I, b * (one - d), "beta*dt*(1 - delta*dt)"),
                second(S, d * (one - (b + k)), "delta*dt*(1 - (beta + kappa)*dt)"),
            ],
        ),
        rule(
            A,
            I,
            Pos,
            vec![
                flip(one - d - ba * (one - d * 2.0), "1 - delta*dt - beta_a*dt*(1 - 2*delta*dt)"),
                first(I, ba * (one - d), "beta_a*dt*(1 - delta*dt)"),
                second(S, d * (one - ba), "delta*dt*(1 - beta_a*dt)"),
            ],
        ),
        rule(
            I,
            I,
            Pos,
            vec![
                flip(one - d * 2.0 * (one - d), "1 - 2*delta*dt*(1 - delta*dt)"),
                first(S, d * (one - d), "delta*dt*(1 - delta*dt)"),
                second(S, d * (one - d), "delta*dt*(1 - delta*dt)"),
            ],
        ),
        rule(I, I, Neg, vec![flip(one - d * 2.0, "1 - 2*delta*dt"), first(S, d, "delta*dt"), second(S, d, "delta*dt")]),
    ]
}

/// Outcome distribution for `c` in its own orientation. Outcomes with zero
/// probability are omitted.
pub fn transition_distribution(c: EdgeConfig, p: &Params) -> Result<Vec<TransitionOutcome>> {
    if c.sign.is_zero() {
        return Err(Error::InvalidParams(format!("no dynamics defined for unlinked pair {c}")));
    }
    p.validate()?;
    Ok(distribution_unchecked(c, p))
}

/// Symbolic outcomes for `c` in its own orientation (mirrored from the
/// canonical rule when needed). Empty for unlinked pairs.
pub fn ordered_outcomes(c: EdgeConfig, p: &Params) -> Vec<RuleOutcome> {
    if c.sign.is_zero() {
        return Vec::new();
    }
    let swapped = rank(c.xi) > rank(c.xj);
    let canonical = if swapped { c.mirrored() } else { c };
    let rule = rules(p).into_iter().find(|r| r.source == canonical).expect("every linked configuration has a rule");
    rule.outcomes
        .into_iter()
        .map(|o| RuleOutcome { change: if swapped { o.change.mirrored() } else { o.change }, ..o })
        .collect()
}

fn distribution_unchecked(c: EdgeConfig, p: &Params) -> Vec<TransitionOutcome> {
    ordered_outcomes(c, p)
        .into_iter()
        .filter_map(|o| {
            let probability = o.poly.eval(p.dt);
            (probability != 0.0).then(|| TransitionOutcome {
                target: c.apply(o.change),
                change: o.change,
                probability,
                kind: o.change.kind(),
            })
        })
        .collect()
}

/// Outcome lists for all 27 ordered pair states, built once per parameter
/// set. Unlinked states have no entries.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    params: Params,
    rows: Vec<Vec<TransitionOutcome>>,
}

impl TransitionTable {
    pub fn new(p: &Params) -> Result<Self> {
        p.validate()?;
        let rows = (0..27)
            .map(|idx| {
                let c = EdgeConfig::from_index(idx).expect("index below 27");
                if c.sign.is_zero() {
                    Vec::new()
                } else {
                    distribution_unchecked(c, p)
                }
            })
            .collect();
        Ok(TransitionTable { params: *p, rows })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn outcomes(&self, c: EdgeConfig) -> &[TransitionOutcome] {
        &self.rows[c.index()]
    }

    /// Inverse-CDF draw over the outcomes of `c`.
    pub fn sample<R: Rng + ?Sized>(&self, c: EdgeConfig, rng: &mut R) -> TransitionOutcome {
        let row = &self.rows[c.index()];
        assert!(!row.is_empty(), "no transitions for unlinked pair {c}");
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for o in row {
            acc += o.probability;
            if u < acc {
                return *o;
            }
        }
        *row.last().expect("nonempty row")
    }
}

/// Draws one outcome for `c`. Prefer [`TransitionTable::sample`] in loops.
pub fn sample_transition<R: Rng + ?Sized>(c: EdgeConfig, p: &Params, rng: &mut R) -> Result<TransitionOutcome> {
    Ok(TransitionTable::new(p)?.sample(c, rng))
}

/// Which energy change decides whether a proposed sign flip is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcceptanceGate {
    /// Weighted total energy.
    #[default]
    Total,
    /// Triad energy only.
    Triad,
    /// Every proposal is applied.
    None,
}

impl std::str::FromStr for AcceptanceGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(AcceptanceGate::Total),
            "triad" => Ok(AcceptanceGate::Triad),
            "none" => Ok(AcceptanceGate::None),
            other => Err(Error::Config(format!("unknown gate `{other}`"))),
        }
    }
}

/// Which proposals go through the energy gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateScope {
    /// Only sign flips are gated; epidemic changes always apply.
    #[default]
    Flips,
    /// Epidemic changes are gated as well, on the exact network energy change.
    All,
    /// Epidemic changes are gated on the selected pair's own energy change.
    Pair,
}

impl std::str::FromStr for GateScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flips" => Ok(GateScope::Flips),
            "all" => Ok(GateScope::All),
            "pair" => Ok(GateScope::Pair),
            other => Err(Error::Config(format!("unknown gate scope `{other}`"))),
        }
    }
}

/// Decision for a weighted energy change `ΔE`: accept if negative, reject if
/// positive, coin flip on a tie.
pub fn accept_energy_change<R: Rng + ?Sized>(delta: EnergyDelta, rng: &mut R) -> bool {
    match delta.sign() {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => rng.gen_bool(0.5),
    }
}

/// Normalized components of an energy change and their weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDelta {
    pub pair: f64,
    pub triad: f64,
    pub alpha: f64,
}

impl EnergyDelta {
    pub fn total(&self) -> f64 {
        self.alpha * self.triad + (1.0 - self.alpha) * self.pair
    }

    /// Sign of the total with cancellation below relative rounding treated
    /// as an exact tie.
    pub fn sign(&self) -> std::cmp::Ordering {
        let a = self.alpha * self.triad;
        let b = (1.0 - self.alpha) * self.pair;
        let total = a + b;
        if total.abs() <= 1e-12 * (a.abs() + b.abs()) {
            std::cmp::Ordering::Equal
        } else {
            total.partial_cmp(&0.0).expect("finite energy change")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use NodeState::*;

    fn reference_params() -> Params {
        Params { beta: 6.0, beta_a: 1.8, kappa: 4.0, delta: 9.0, dt: 0.001, alpha: 0.5 }
    }

    #[test]
    fn s_plus_i_infection_probability() {
        let c = EdgeConfig::new(Susceptible, Infected, Sign::Positive);
        let dist = transition_distribution(c, &reference_params()).unwrap();
        let inf = dist.iter().find(|o| o.target == EdgeConfig::new(Infected, Infected, Sign::Positive)).unwrap();
        assert!((inf.probability - 0.005946).abs() < 1e-15);
        let total: f64 = dist.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn neutral_flips_are_certain() {
        for c in [
            EdgeConfig::new(Susceptible, Susceptible, Sign::Negative),
            EdgeConfig::new(Alert, Susceptible, Sign::Negative),
            EdgeConfig::new(Alert, Alert, Sign::Positive),
        ] {
            let dist = transition_distribution(c, &reference_params()).unwrap();
            assert_eq!(dist.len(), 1);
            assert_eq!(dist[0].probability, 1.0);
            assert_eq!(dist[0].kind, TransitionKind::SignFlip);
            assert_eq!(dist[0].target, EdgeConfig::new(c.xi, c.xj, c.sign.flipped()));
        }
    }

    #[test]
    fn orientation_is_respected() {
        let p = reference_params();
        let fwd = transition_distribution(EdgeConfig::new(Susceptible, Infected, Sign::Positive), &p).unwrap();
        let rev = transition_distribution(EdgeConfig::new(Infected, Susceptible, Sign::Positive), &p).unwrap();
        assert_eq!(fwd.len(), rev.len());
        for (f, r) in fwd.iter().zip(&rev) {
            assert_eq!(f.probability, r.probability);
            assert_eq!(f.target.mirrored(), r.target);
        }
    }

    #[test]
    fn rules_sum_to_one_symbolically() {
        for rule in rules(&reference_params()) {
            let sum = rule.outcomes.iter().fold(Poly([0.0; 3]), |acc, o| acc + o.poly);
            let [c0, c1, c2] = sum.coefficients();
            assert!((c0 - 1.0).abs() < 1e-15 && c1.abs() < 1e-12 && c2.abs() < 1e-9, "{}: {:?}", rule.source, sum);
        }
    }

    #[test]
    fn each_outcome_changes_one_aspect() {
        let p = reference_params();
        for c in EdgeConfig::unordered_linked() {
            for o in transition_distribution(c, &p).unwrap() {
                let changed =
                    [o.target.xi != c.xi, o.target.xj != c.xj, o.target.sign != c.sign].iter().filter(|&&b| b).count();
                assert_eq!(changed, 1, "{c} -> {}", o.target);
            }
        }
    }

    #[test]
    fn no_alert_without_kappa() {
        let p = Params { kappa: 0.0, ..reference_params() };
        for x in [Susceptible, Infected] {
            for y in [Susceptible, Infected] {
                for s in [Sign::Positive, Sign::Negative] {
                    for o in transition_distribution(EdgeConfig::new(x, y, s), &p).unwrap() {
                        assert!(o.target.xi != Alert && o.target.xj != Alert);
                    }
                }
            }
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let base = reference_params();
        assert!(Params { dt: 0.0, ..base }.validate().is_err());
        assert!(Params { beta_a: 7.0, ..base }.validate().is_err());
        assert!(Params { alpha: 1.5, ..base }.validate().is_err());
        let err = Params { dt: 0.2, ..base }.validate().unwrap_err();
        assert!(matches!(err, Error::ProbabilityOutOfRange { .. }), "{err}");
        assert!(Params { beta: 0.0, beta_a: 0.0, ..base }.validate().is_ok());
    }

    #[test]
    fn sampling_is_deterministic() {
        let table = TransitionTable::new(&reference_params()).unwrap();
        let c = EdgeConfig::new(Susceptible, Infected, Sign::Positive);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| table.sample(c, &mut rng).target).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = EdgeConfig::new(Susceptible, Alert, Sign::Negative);
        for _ in 0..100 {
            assert_eq!(table.sample(c, &mut rng).kind, TransitionKind::SignFlip);
        }
    }

    #[test]
    fn empirical_infection_frequency() {
        let table = TransitionTable::new(&reference_params()).unwrap();
        let c = EdgeConfig::new(Susceptible, Infected, Sign::Positive);
        let target = EdgeConfig::new(Infected, Infected, Sign::Positive);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| table.sample(c, &mut rng).target == target).count();
        let p = 0.005946;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let freq = hits as f64 / n as f64;
        assert!((freq - p).abs() < 3.0 * sigma, "freq {freq}, expected {p} ± {}", 3.0 * sigma);
    }

    #[test]
    fn config_index_round_trips() {
        for idx in 0..27 {
            assert_eq!(EdgeConfig::from_index(idx).unwrap().index(), idx);
        }
        assert_eq!(EdgeConfig::new(Susceptible, Infected, Sign::Positive).index(), 9 * 2 + 2);
    }

    #[test]
    fn tie_detection() {
        let d = EnergyDelta { pair: 0.0, triad: 0.0, alpha: 0.3 };
        assert_eq!(d.sign(), std::cmp::Ordering::Equal);
        let d = EnergyDelta { pair: -2.0 / 16110.0, triad: 2.0 * 59.33 / 955860.0, alpha: 0.5 };
        assert_ne!(d.sign(), std::cmp::Ordering::Equal);
    }
}
