//! Single-pair Markov chain over the 27 `(x, y, z)` configurations.
//!
//! Linked configurations move according to the transition table; the nine
//! unlinked ones (`z = 0`) are absorbing and kept only so that indices match
//! [`EdgeConfig::index`].

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{ordered_outcomes, EdgeConfig, Params, Poly};
use crate::energy::NodeState;
use crate::graph::Sign;
use crate::{Error, Result};

pub const PAIR_STATES: usize = 27;

/// Tolerance used to decide whether a matrix entry is structurally nonzero.
const SUPPORT_EPS: f64 = 1e-300;

pub fn pair_label(idx: usize) -> String {
    EdgeConfig::from_index(idx).map(|c| c.to_string()).unwrap_or_default()
}

fn is_linked(idx: usize) -> bool {
    idx % 3 != 1
}

/// Entry-wise polynomial form of the pair transition matrix.
pub fn symbolic_matrix(p: &Params) -> Vec<Vec<Poly>> {
    let zero = Poly([0.0; 3]);
    let mut m = vec![vec![zero; PAIR_STATES]; PAIR_STATES];
    for (idx, row) in m.iter_mut().enumerate() {
        let c = EdgeConfig::from_index(idx).expect("index below 27");
        if c.sign.is_zero() {
            row[idx] = Poly::ONE;
            continue;
        }
        for o in ordered_outcomes(c, p) {
            let t = c.apply(o.change).index();
            row[t] = row[t] + o.poly;
        }
    }
    m
}

/// Row-stochastic 27×27 matrix `P(Δt)`.
pub fn transition_matrix(p: &Params) -> Result<DMatrix<f64>> {
    p.validate()?;
    let sym = symbolic_matrix(p);
    Ok(DMatrix::from_fn(PAIR_STATES, PAIR_STATES, |i, j| sym[i][j].eval(p.dt)))
}

/// A closed communicating class and the probability mass it eventually
/// receives from the initial distribution.
#[derive(Debug, Clone)]
pub struct RecurrentClass {
    pub states: Vec<usize>,
    pub weight: f64,
    pub period: usize,
}

#[derive(Debug, Clone)]
pub struct Stationary {
    pub pi: DVector<f64>,
    pub classes: Vec<RecurrentClass>,
    /// `max |πP − π|`.
    pub residual: f64,
}

impl Stationary {
    /// Number of closed classes that receive mass; above one the limit
    /// depends on the start.
    pub fn multiplicity(&self) -> usize {
        self.classes.iter().filter(|c| c.weight > 0.0).count()
    }
}

fn reachability(p: &DMatrix<f64>) -> Vec<Vec<bool>> {
    let n = p.nrows();
    let mut reach = vec![vec![false; n]; n];
    for (s, row) in reach.iter_mut().enumerate() {
        let mut stack = vec![s];
        row[s] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if p[(u, v)] > SUPPORT_EPS && !row[v] {
                    row[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    reach
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn class_period(p: &DMatrix<f64>, states: &[usize]) -> usize {
    let mut level = vec![usize::MAX; p.nrows()];
    level[states[0]] = 0;
    let mut queue = std::collections::VecDeque::from([states[0]]);
    let mut g = 0;
    while let Some(u) = queue.pop_front() {
        for &v in states {
            if p[(u, v)] <= SUPPORT_EPS {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                g = gcd(g, level[u] + 1 - level[v]);
            }
        }
    }
    g.max(1)
}

/// Stationary law of a single closed class: solves `π(P_CC − I) = 0`,
/// `Σπ = 1` by LU.
fn class_distribution(p: &DMatrix<f64>, states: &[usize]) -> Result<DVector<f64>> {
    let k = states.len();
    if k == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    let mut a = DMatrix::from_fn(k, k, |r, c| p[(states[c], states[r])] - if r == c { 1.0 } else { 0.0 });
    for c in 0..k {
        a[(k - 1, c)] = 1.0;
    }
    let mut b = DVector::zeros(k);
    b[k - 1] = 1.0;
    a.lu().solve(&b).ok_or_else(|| Error::Solver(format!("singular system for closed class {states:?}")))
}

/// Long-run distribution started from `initial`.
///
/// Closed classes are found from the support of `p`; each gets its own
/// stationary law, weighted by the absorption probability from `initial`.
/// For periodic classes this is the Cesàro limit.
pub fn stationary_distribution(p: &DMatrix<f64>, initial: &DVector<f64>) -> Result<Stationary> {
    let n = p.nrows();
    if p.ncols() != n || initial.len() != n {
        return Err(Error::Solver(format!("shape mismatch: matrix {}x{}, initial {}", n, p.ncols(), initial.len())));
    }
    for i in 0..n {
        let s: f64 = p.row(i).sum();
        if (s - 1.0).abs() > 1e-9 || p.row(i).iter().any(|&v| v < -1e-15) {
            return Err(Error::Solver(format!("row {i} is not stochastic (sum {s})")));
        }
    }
    let mass = initial.sum();
    if (mass - 1.0).abs() > 1e-9 || initial.iter().any(|&v| v < 0.0) {
        return Err(Error::Solver(format!("initial distribution sums to {mass}")));
    }

    let reach = reachability(p);
    let mut seen = vec![false; n];
    let mut closed: Vec<Vec<usize>> = Vec::new();
    let mut transient = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&t| reach[s][t] && reach[t][s]).collect();
        for &m in &members {
            seen[m] = true;
        }
        if (0..n).all(|t| !reach[s][t] || reach[t][s]) {
            closed.push(members);
        } else {
            transient.extend(members);
        }
    }
    transient.sort_unstable();

    // Absorption probabilities h[t][c] from transient states.
    let nt = transient.len();
    let absorb = if nt > 0 {
        let q = DMatrix::from_fn(nt, nt, |r, c| (if r == c { 1.0 } else { 0.0 }) - p[(transient[r], transient[c])]);
        let rhs =
            DMatrix::from_fn(nt, closed.len(), |r, c| closed[c].iter().map(|&s| p[(transient[r], s)]).sum::<f64>());
        q.lu().solve(&rhs).ok_or_else(|| Error::Solver("transient block is singular".into()))?
    } else {
        DMatrix::zeros(0, closed.len())
    };

    let mut weights: Vec<f64> = closed
        .iter()
        .enumerate()
        .map(|(c, states)| {
            let direct: f64 = states.iter().map(|&s| initial[s]).sum();
            direct + transient.iter().enumerate().map(|(r, &t)| initial[t] * absorb[(r, c)]).sum::<f64>()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }

    let mut pi = DVector::zeros(n);
    let mut classes = Vec::with_capacity(closed.len());
    for (states, weight) in closed.iter().zip(weights) {
        let mut local = class_distribution(p, states)?;
        local /= local.sum();
        for (k, &s) in states.iter().enumerate() {
            pi[s] += weight * local[k];
        }
        classes.push(RecurrentClass { states: states.clone(), weight, period: class_period(p, states) });
    }
    let residual = (pi.transpose() * p - pi.transpose()).amax();
    Ok(Stationary { pi, classes, residual })
}

/// Uniform over the 18 linked configurations.
pub fn uniform_linked_initial() -> DVector<f64> {
    DVector::from_fn(PAIR_STATES, |i, _| if is_linked(i) { 1.0 / 18.0 } else { 0.0 })
}

/// Uniform over linked configurations with no alert endpoint.
pub fn no_alert_initial() -> DVector<f64> {
    let ok = |i: usize| {
        let c = EdgeConfig::from_index(i).expect("index below 27");
        !c.sign.is_zero() && c.xi != NodeState::Alert && c.xj != NodeState::Alert
    };
    let k = (0..PAIR_STATES).filter(|&i| ok(i)).count() as f64;
    DVector::from_fn(PAIR_STATES, |i, _| if ok(i) { 1.0 / k } else { 0.0 })
}

/// Long-run pair law for `p`, starting from `initial` (or uniform over linked
/// configurations).
pub fn pair_stationary(p: &Params, initial: Option<&DVector<f64>>) -> Result<Stationary> {
    let m = transition_matrix(p)?;
    let init = initial.cloned().unwrap_or_else(uniform_linked_initial);
    stationary_distribution(&m, &init)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginals {
    pub s: f64,
    pub a: f64,
    pub rho: f64,
    pub r: f64,
}

/// Node-state marginals of the first endpoint and the positive-link share.
pub fn marginals(pi: &DVector<f64>) -> Marginals {
    let mut m = Marginals { s: 0.0, a: 0.0, rho: 0.0, r: 0.0 };
    for (idx, &w) in pi.iter().enumerate() {
        let c = EdgeConfig::from_index(idx).expect("index below 27");
        match c.xi {
            NodeState::Susceptible => m.s += w,
            NodeState::Alert => m.a += w,
            NodeState::Infected => m.rho += w,
        }
        if c.sign == Sign::Positive {
            m.r += w;
        }
    }
    m
}

/// Small-`Δt` limits of the pair matrix.
#[derive(Debug, Clone)]
pub struct GeneratorReport {
    /// `lim (P − I)/Δt` entry by entry: off-diagonal entries with an O(1)
    /// probability diverge, as does the diagonal of every linked row.
    pub literal: DMatrix<f64>,
    /// Rates from the O(Δt) coefficients, with diagonals set so rows sum to 0.
    /// Entries carrying an O(1) probability are `+∞`.
    pub rates: DMatrix<f64>,
    /// Rows whose limit is not a valid generator row.
    pub non_conservative: Vec<usize>,
}

pub fn generator_report(p: &Params) -> GeneratorReport {
    let sym = symbolic_matrix(p);
    let n = PAIR_STATES;
    let mut literal = DMatrix::zeros(n, n);
    let mut rates = DMatrix::zeros(n, n);
    let mut non_conservative = Vec::new();
    for i in 0..n {
        let mut row_ok = true;
        let mut off = 0.0;
        for j in 0..n {
            let [c0, c1, _] = sym[i][j].coefficients();
            if i == j {
                literal[(i, j)] = if c0 < 1.0 { f64::NEG_INFINITY } else { c1 };
                if c0 < 1.0 {
                    row_ok = false;
                }
                continue;
            }
            literal[(i, j)] = if c0 > 0.0 { f64::INFINITY } else { c1 };
            if c0 > 0.0 {
                row_ok = false;
                rates[(i, j)] = f64::INFINITY;
            } else {
                rates[(i, j)] = c1;
                off += c1;
            }
        }
        rates[(i, i)] = -off;
        if !row_ok {
            non_conservative.push(i);
        }
    }
    GeneratorReport { literal, rates, non_conservative }
}

/// Writes a 27×27 matrix as CSV with labeled rows and columns.
pub fn write_matrix_csv<W: Write>(w: &mut W, m: &DMatrix<f64>) -> std::io::Result<()> {
    write!(w, "from")?;
    for j in 0..m.ncols() {
        write!(w, ",{}", pair_label(j))?;
    }
    writeln!(w)?;
    for i in 0..m.nrows() {
        write!(w, "{}", pair_label(i))?;
        for j in 0..m.ncols() {
            write!(w, ",{}", m[(i, j)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes `index,config,pi` rows for the 18 linked configurations.
pub fn write_stationary_csv<W: Write>(w: &mut W, pi: &DVector<f64>) -> std::io::Result<()> {
    writeln!(w, "index,config,pi")?;
    for (i, v) in pi.iter().enumerate().filter(|(i, _)| is_linked(*i)) {
        writeln!(w, "{i},{},{v}", pair_label(i))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TransitionTable;

    fn idx(x: NodeState, y: NodeState, z: Sign) -> usize {
        EdgeConfig::new(x, y, z).index()
    }

    #[test]
    fn rows_are_stochastic() {
        let m = transition_matrix(&Params::default()).unwrap();
        for i in 0..PAIR_STATES {
            assert!((m.row(i).sum() - 1.0).abs() < 1e-12, "row {i}");
        }
    }

    #[test]
    fn matches_transition_table() {
        let p = Params::default();
        let m = transition_matrix(&p).unwrap();
        let t = TransitionTable::new(&p).unwrap();
        for i in (0..PAIR_STATES).filter(|&i| is_linked(i)) {
            let mut row = vec![0.0; PAIR_STATES];
            for o in t.outcomes(EdgeConfig::from_index(i).unwrap()) {
                row[o.target.index()] += o.probability;
            }
            for (j, v) in row.iter().enumerate() {
                assert!((m[(i, j)] - v).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn infection_entry() {
        use NodeState::*;
        let m = transition_matrix(&Params::default()).unwrap();
        let v = m[(idx(Susceptible, Infected, Sign::Positive), idx(Infected, Infected, Sign::Positive))];
        assert!((v - 0.005946).abs() < 1e-12, "{v}");
    }

    #[test]
    fn doubly_stochastic_gives_uniform() {
        let n = 4;
        let p = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j || i == j { 0.5 } else { 0.0 });
        let init = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let st = stationary_distribution(&p, &init).unwrap();
        for v in st.pi.iter() {
            assert!((v - 0.25).abs() < 1e-12);
        }
        assert_eq!(st.multiplicity(), 1);
    }

    #[test]
    fn period_two_toy() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let init = DVector::from_row_slice(&[1.0, 0.0]);
        let st = stationary_distribution(&p, &init).unwrap();
        assert!((st.pi[0] - 0.5).abs() < 1e-12 && (st.pi[1] - 0.5).abs() < 1e-12);
        assert_eq!(st.classes[0].period, 2);
    }

    #[test]
    fn absorption_weights() {
        // 0 -> {1, 2} with 1/4, 3/4; 1 and 2 absorbing.
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 0.25, 0.75, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let init = DVector::from_row_slice(&[1.0, 0.0, 0.0]);
        let st = stationary_distribution(&p, &init).unwrap();
        assert_eq!(st.multiplicity(), 2);
        assert!((st.pi[1] - 0.25).abs() < 1e-12 && (st.pi[2] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.0, 1.0]);
        let init = DVector::from_row_slice(&[1.0, 0.0]);
        assert!(matches!(stationary_distribution(&p, &init), Err(Error::Solver(_))));
    }

    #[test]
    fn pair_residual_small() {
        let st = pair_stationary(&Params::default(), None).unwrap();
        assert!(st.residual <= 1e-10, "{}", st.residual);
        assert!((st.pi.sum() - 1.0).abs() < 1e-12);
        let m = marginals(&st.pi);
        assert!((m.s + m.a + m.rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_alert_without_kappa() {
        let p = Params { kappa: 0.0, ..Params::default() };
        let st = pair_stationary(&p, Some(&no_alert_initial())).unwrap();
        assert!(marginals(&st.pi).a.abs() < 1e-12);
    }

    #[test]
    fn marginals_of_uniform_linked() {
        let m = marginals(&uniform_linked_initial());
        for v in [m.s, m.a, m.rho] {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((m.r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stable_under_smaller_step() {
        let p = Params::default();
        let fine = Params { dt: p.dt / 10.0, ..p };
        let a = marginals(&pair_stationary(&p, None).unwrap().pi);
        let b = marginals(&pair_stationary(&fine, None).unwrap().pi);
        for (x, y) in [(a.s, b.s), (a.a, b.a), (a.rho, b.rho), (a.r, b.r)] {
            assert!((x - y).abs() < 1e-3, "{x} vs {y}");
        }
    }

    #[test]
    fn generator_flags_linked_rows() {
        let g = generator_report(&Params::default());
        assert_eq!(g.non_conservative.len(), 18);
        assert!(g.literal[(0, 0)].is_infinite());
        let unlinked = idx(NodeState::Alert, NodeState::Alert, Sign::Zero);
        assert_eq!(g.literal[(unlinked, unlinked)], 0.0);
    }

    #[test]
    fn csv_has_labeled_rows() {
        let mut buf = Vec::new();
        write_stationary_csv(&mut buf, &uniform_linked_initial()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 19);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &transition_matrix(&Params::default()).unwrap()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 28);
    }
}
