//! Signed undirected graphs with ternary edge signs.
//!
//! A [`SignedGraph`] stores one sign per unordered node pair. Zero means "no
//! link"; the adjacency lists mirror exactly the pairs with a nonzero sign.
//! Two backings exist: a dense `n × n` sign matrix, used for complete or small
//! networks where lookups must be constant-time, and a hash map keyed by the
//! canonical `(min, max)` pair for large sparse datasets.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Dense index of a node, `0..n`.
pub type NodeId = usize;

/// Graphs at or below this size get the dense backing from [`SignedGraph::new`].
pub const DENSE_THRESHOLD: usize = 2048;

/// Polarity of a social link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(i8)]
pub enum Sign {
    /// Hostile link.
    Negative = -1,
    /// No link.
    #[default]
    Zero = 0,
    /// Friendly link.
    Positive = 1,
}

impl Sign {
    #[inline]
    pub fn value(self) -> i8 {
        self as i8
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }

    /// Opposite polarity; `Zero` stays `Zero`.
    #[inline]
    pub fn flipped(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }

    /// Sign of an integer (`signum`).
    #[inline]
    pub fn signum(x: i64) -> Sign {
        match x.signum() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }

    #[inline]
    fn from_i8_unchecked(v: i8) -> Sign {
        match v {
            -1 => Sign::Negative,
            1 => Sign::Positive,
            _ => Sign::Zero,
        }
    }
}

impl TryFrom<i64> for Sign {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Sign::Negative),
            0 => Ok(Sign::Zero),
            1 => Ok(Sign::Positive),
            other => Err(Error::InvalidSign(other)),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Negative => f.write_str("-"),
            Sign::Zero => f.write_str("0"),
            Sign::Positive => f.write_str("+"),
        }
    }
}

#[derive(Debug, Clone)]
enum SignStore {
    Dense(Vec<i8>),
    Sparse(HashMap<(u32, u32), Sign>),
}

/// Symmetric signed relation over `n` nodes.
#[derive(Debug, Clone)]
pub struct SignedGraph {
    n: usize,
    store: SignStore,
    /// Sorted neighbor lists over nonzero signs.
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

#[inline]
fn canonical(i: NodeId, j: NodeId) -> (u32, u32) {
    if i < j {
        (i as u32, j as u32)
    } else {
        (j as u32, i as u32)
    }
}

impl SignedGraph {
    /// Empty graph; dense backing when `n <= DENSE_THRESHOLD`.
    pub fn new(n: usize) -> Self {
        if n <= DENSE_THRESHOLD {
            Self::new_dense(n)
        } else {
            Self::new_sparse(n)
        }
    }

    pub fn new_dense(n: usize) -> Self {
        SignedGraph { n, store: SignStore::Dense(vec![0; n * n]), adjacency: vec![Vec::new(); n], edge_count: 0 }
    }

    pub fn new_sparse(n: usize) -> Self {
        SignedGraph { n, store: SignStore::Sparse(HashMap::new()), adjacency: vec![Vec::new(); n], edge_count: 0 }
    }

    /// Complete graph with every pair set to `sign`.
    pub fn complete(n: usize, sign: Sign) -> Self {
        let mut g = Self::new_dense(n);
        if !sign.is_zero() {
            for i in 0..n {
                for j in (i + 1)..n {
                    g.set_sign(i, j, sign).expect("indices in range");
                }
            }
        }
        g
    }

    /// Builds a graph from `(i, j, sign)` triples. Later triples overwrite
    /// earlier ones for the same pair.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, Sign)>,
    {
        let mut g = Self::new(n);
        for (i, j, s) in edges {
            g.set_sign(i, j, s)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of unordered pairs with a nonzero sign.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.store, SignStore::Dense(_))
    }

    /// Same graph with a dense sign matrix backing.
    pub fn to_dense(&self) -> Self {
        if self.is_dense() {
            return self.clone();
        }
        let mut g = Self::new_dense(self.n);
        for (i, j, s) in self.edges() {
            g.set_sign(i, j, s).expect("indices in range");
        }
        g
    }

    fn check_pair(&self, i: NodeId, j: NodeId) -> Result<()> {
        if i >= self.n {
            return Err(Error::NodeOutOfRange { node: i, n: self.n });
        }
        if j >= self.n {
            return Err(Error::NodeOutOfRange { node: j, n: self.n });
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Ok(())
    }

    /// Sign of the pair `(i, j)`. Panics on out-of-range nodes; a self pair
    /// reads as `Zero`.
    #[inline]
    pub fn sign(&self, i: NodeId, j: NodeId) -> Sign {
        match &self.store {
            SignStore::Dense(m) => Sign::from_i8_unchecked(m[i * self.n + j]),
            SignStore::Sparse(map) => map.get(&canonical(i, j)).copied().unwrap_or(Sign::Zero),
        }
    }

    /// Checked variant of [`SignedGraph::sign`].
    pub fn get_sign(&self, i: NodeId, j: NodeId) -> Result<Sign> {
        self.check_pair(i, j)?;
        Ok(self.sign(i, j))
    }

    pub fn set_sign(&mut self, i: NodeId, j: NodeId, s: Sign) -> Result<()> {
        self.check_pair(i, j)?;
        let old = self.sign(i, j);
        if old == s {
            return Ok(());
        }
        match &mut self.store {
            SignStore::Dense(m) => {
                m[i * self.n + j] = s.value();
                m[j * self.n + i] = s.value();
            }
            SignStore::Sparse(map) => {
                if s.is_zero() {
                    map.remove(&canonical(i, j));
                } else {
                    map.insert(canonical(i, j), s);
                }
            }
        }
        match (old.is_zero(), s.is_zero()) {
            (true, false) => {
                insert_sorted(&mut self.adjacency[i], j);
                insert_sorted(&mut self.adjacency[j], i);
                self.edge_count += 1;
            }
            (false, true) => {
                remove_sorted(&mut self.adjacency[i], j);
                remove_sorted(&mut self.adjacency[j], i);
                self.edge_count -= 1;
            }
            _ => {}
        }
        Ok(())
    }

    /// Flips a nonzero sign in place without touching adjacency. Used by the
    /// dynamics, where links are never created or deleted.
    #[inline]
    pub(crate) fn flip_nonzero(&mut self, i: NodeId, j: NodeId) {
        match &mut self.store {
            SignStore::Dense(m) => {
                let v = -m[i * self.n + j];
                debug_assert!(v != 0);
                m[i * self.n + j] = v;
                m[j * self.n + i] = v;
            }
            SignStore::Sparse(map) => {
                let e = map.get_mut(&canonical(i, j)).expect("flip on absent link");
                *e = e.flipped();
            }
        }
    }

    #[inline]
    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.adjacency[i]
    }

    #[inline]
    pub fn degree(&self, i: NodeId) -> usize {
        self.adjacency[i].len()
    }

    /// Nonzero edges as `(i, j, sign)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Sign)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(move |(i, nbrs)| nbrs.iter().filter(move |&&j| j > i).map(move |&j| (i, j, self.sign(i, j))))
    }

    pub fn positive_edge_count(&self) -> usize {
        self.edges().filter(|&(_, _, s)| s == Sign::Positive).count()
    }

    /// `Σ_{k ∉ {i,j}} sign(i,k)·sign(j,k)`, the quantity that drives the
    /// triad-energy change when the `(i, j)` sign flips.
    pub fn common_sign_product_sum(&self, i: NodeId, j: NodeId) -> i64 {
        match &self.store {
            SignStore::Dense(m) => {
                let n = self.n;
                let ri = &m[i * n..(i + 1) * n];
                let rj = &m[j * n..(j + 1) * n];
                // Diagonal entries are zero and sign(i,j)·sign(j,j) = 0, so
                // the full row product needs no exclusions.
                ri.iter().zip(rj).map(|(&a, &b)| i32::from(a * b)).sum::<i32>() as i64
            }
            SignStore::Sparse(_) => {
                let (small, other) = if self.degree(i) <= self.degree(j) { (i, j) } else { (j, i) };
                self.adjacency[small]
                    .iter()
                    .filter(|&&k| k != other)
                    .map(|&k| i64::from(self.sign(small, k).value() * self.sign(other, k).value()))
                    .sum()
            }
        }
    }

    /// Every closed triad `(i, j, k)` with `i < j < k` and all three signs
    /// nonzero, each exactly once.
    pub fn triads(&self) -> impl Iterator<Item = (NodeId, NodeId, NodeId)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.adjacency[i]
                .iter()
                .copied()
                .filter(move |&j| j > i)
                .flat_map(move |j| intersect_above(&self.adjacency[i], &self.adjacency[j], j).map(move |k| (i, j, k)))
        })
    }

    pub fn triad_count(&self) -> u64 {
        self.triads().count() as u64
    }

    /// Connected components over nonzero links, as a label per node and the
    /// number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        self.components_where(|_| true)
    }

    /// Connected components using only links whose sign satisfies `keep`.
    pub fn components_where<F: Fn(Sign) -> bool>(&self, keep: F) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for root in 0..self.n {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = count;
            stack.push(root);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if label[v] == usize::MAX && keep(self.sign(u, v)) {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Subgraph induced by `nodes`; node `nodes[k]` becomes node `k`.
    pub fn induced(&self, nodes: &[NodeId]) -> Self {
        let mut index = HashMap::with_capacity(nodes.len());
        for (k, &v) in nodes.iter().enumerate() {
            index.insert(v, k);
        }
        let mut g = Self::new(nodes.len());
        for (a, &u) in nodes.iter().enumerate() {
            for &v in &self.adjacency[u] {
                if let Some(&b) = index.get(&v) {
                    if a < b {
                        g.set_sign(a, b, self.sign(u, v)).expect("indices in range");
                    }
                }
            }
        }
        g
    }
}

/// Sharp upper bound `(n/6)(2m − n + 1)^{3/2}` on the number of triangles in
/// a connected graph with `n` nodes and `m` edges; zero when the radicand is
/// negative. Isolated nodes can make it fail.
pub fn triad_count_upper_bound(n: u64, m: u64) -> f64 {
    let radicand = 2.0 * m as f64 - n as f64 + 1.0;
    if radicand <= 0.0 {
        return 0.0;
    }
    n as f64 / 6.0 * radicand.powf(1.5)
}

fn insert_sorted(v: &mut Vec<NodeId>, x: NodeId) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

fn remove_sorted(v: &mut Vec<NodeId>, x: NodeId) {
    if let Ok(pos) = v.binary_search(&x) {
        v.remove(pos);
    }
}

/// Elements common to two sorted lists that are strictly greater than `floor`.
fn intersect_above<'a>(a: &'a [NodeId], b: &'a [NodeId], floor: NodeId) -> impl Iterator<Item = NodeId> + 'a {
    let a = &a[a.partition_point(|&x| x <= floor)..];
    let b = &b[b.partition_point(|&x| x <= floor)..];
    let (mut p, mut q) = (0, 0);
    std::iter::from_fn(move || {
        while p < a.len() && q < b.len() {
            match a[p].cmp(&b[q]) {
                std::cmp::Ordering::Less => p += 1,
                std::cmp::Ordering::Greater => q += 1,
                std::cmp::Ordering::Equal => {
                    let x = a[p];
                    p += 1;
                    q += 1;
                    return Some(x);
                }
            }
        }
        None
    })
}
