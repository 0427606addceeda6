//! Signed graphs, clusterings, disagreement/cut vectors and `l_q` norms.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{contract, Error, Result};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

/// An undirected edge stored in canonical form `u < v`.
///
/// Infinite edges carry `weight == 0.0` and `infinite == true`; they never enter
/// arithmetic, disagreeing on one only marks the result infeasible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub sign: Sign,
    pub weight: f64,
    pub infinite: bool,
}

impl Edge {
    pub fn new(u: usize, v: usize, sign: Sign, weight: f64) -> Self {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        Self {
            u,
            v,
            sign,
            weight,
            infinite: false,
        }
    }

    pub fn pos(u: usize, v: usize, weight: f64) -> Self {
        Self::new(u, v, Sign::Pos, weight)
    }

    pub fn neg(u: usize, v: usize, weight: f64) -> Self {
        Self::new(u, v, Sign::Neg, weight)
    }

    pub fn infinite(u: usize, v: usize, sign: Sign) -> Self {
        Self {
            infinite: true,
            weight: 0.0,
            ..Self::new(u, v, sign, 0.0)
        }
    }

    #[inline]
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// Whether the edge disagrees with a clustering in which its endpoints are
    /// (`together == true`) or are not in the same cluster.
    #[inline]
    pub fn disagrees(&self, together: bool) -> bool {
        match self.sign {
            Sign::Pos => !together,
            Sign::Neg => together,
        }
    }
}

/// A weighted graph with disjoint positive and negative edge sets.
///
/// Immutable once built; optional bipartition and terminal pair are validated
/// when attached.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedGraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    left: Option<Vec<bool>>,
    terminals: Option<(usize, usize)>,
}

impl SignedGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        let mut canon = Vec::with_capacity(edges.len());
        for e in edges {
            let e = if e.infinite {
                Edge::infinite(e.u, e.v, e.sign)
            } else {
                Edge::new(e.u, e.v, e.sign, e.weight)
            };
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", e.u)));
            }
            if e.v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) out of range for n = {n}",
                    e.u, e.v
                )));
            }
            if !e.infinite && !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has invalid weight {}",
                    e.u, e.v, e.weight
                )));
            }
            if !seen.insert((e.u, e.v)) {
                return Err(Error::InvalidGraph(format!(
                    "pair ({}, {}) appears more than once",
                    e.u, e.v
                )));
            }
            adjacency[e.u].push(canon.len());
            adjacency[e.v].push(canon.len());
            canon.push(e);
        }
        Ok(Self {
            n,
            edges: canon,
            adjacency,
            left: None,
            terminals: None,
        })
    }

    /// Attaches the bipartition `L = left`, `R = V \ L`. Every edge must cross it.
    pub fn with_bipartition(mut self, left: &[usize]) -> Result<Self> {
        let mut side = vec![false; self.n];
        for &u in left {
            if u >= self.n {
                return Err(Error::InvalidGraph(format!("left vertex {u} out of range")));
            }
            if side[u] {
                return Err(Error::InvalidGraph(format!("left vertex {u} listed twice")));
            }
            side[u] = true;
        }
        if let Some(e) = self.edges.iter().find(|e| side[e.u] == side[e.v]) {
            return Err(Error::InvalidGraph(format!(
                "edge ({}, {}) does not cross the bipartition",
                e.u, e.v
            )));
        }
        self.left = Some(side);
        Ok(self)
    }

    pub fn with_terminals(mut self, s: usize, t: usize) -> Result<Self> {
        if s == t || s >= self.n || t >= self.n {
            return Err(Error::InvalidGraph(format!("invalid terminals ({s}, {t})")));
        }
        self.terminals = Some((s, t));
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn pos_edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(|e| e.sign == Sign::Pos)
    }

    pub fn neg_edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(|e| e.sign == Sign::Neg)
    }

    pub fn incident(&self, u: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.adjacency[u].iter().map(move |&i| &self.edges[i])
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    /// `left[u]` is true iff `u` is on the L side.
    pub fn left_side(&self) -> Option<&[bool]> {
        self.left.as_deref()
    }

    pub fn terminals(&self) -> Option<(usize, usize)> {
        self.terminals
    }

    pub fn has_infinite_edges(&self) -> bool {
        self.edges.iter().any(|e| e.infinite)
    }

    /// Total finite weight incident to `u`; an upper bound on any `y_u`.
    pub fn incident_weight(&self, u: usize) -> f64 {
        self.incident(u)
            .filter(|e| !e.infinite)
            .map(|e| e.weight)
            .sum()
    }

    /// Dense `n x n` lookup from vertex pairs to edge indices.
    pub fn pair_lookup(&self) -> Vec<Option<usize>> {
        let mut m = vec![None; self.n * self.n];
        for (i, e) in self.edges.iter().enumerate() {
            m[e.u * self.n + e.v] = Some(i);
            m[e.v * self.n + e.u] = Some(i);
        }
        m
    }

    /// Every unordered pair is an edge of finite weight 1.
    pub fn is_complete_unit(&self) -> bool {
        self.edges.len() == math::pair_count(self.n) && self.all_unit()
    }

    /// Has a bipartition, every L x R pair is an edge, and all weights are 1.
    pub fn is_complete_bipartite_unit(&self) -> bool {
        match &self.left {
            None => false,
            Some(side) => {
                let l = side.iter().filter(|&&b| b).count();
                self.edges.len() == l * (self.n - l) && self.all_unit()
            }
        }
    }

    fn all_unit(&self) -> bool {
        self.edges.iter().all(|e| !e.infinite && e.weight == 1.0)
    }
}

/// A total assignment of vertices to clusters, normalized so that cluster ids
/// are `0..k` in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clustering {
    assignment: Vec<usize>,
    count: usize,
}

impl Clustering {
    pub fn from_assignment(raw: &[usize]) -> Self {
        let mut relabel: Vec<(usize, usize)> = Vec::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for &c in raw {
            let id = match relabel.iter().find(|(old, _)| *old == c) {
                Some(&(_, id)) => id,
                None => {
                    let id = relabel.len();
                    relabel.push((c, id));
                    id
                }
            };
            assignment.push(id);
        }
        Self {
            assignment,
            count: relabel.len(),
        }
    }

    /// Builds a clustering from explicit clusters; every vertex in `0..n` must
    /// appear exactly once.
    pub fn from_clusters(n: usize, clusters: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![usize::MAX; n];
        for (id, cluster) in clusters.iter().enumerate() {
            for &u in cluster {
                if u >= n {
                    return Err(contract(format!("vertex {u} out of range")));
                }
                if raw[u] != usize::MAX {
                    return Err(contract(format!("vertex {u} in two clusters")));
                }
                raw[u] = id;
            }
        }
        if let Some(u) = raw.iter().position(|&c| c == usize::MAX) {
            return Err(contract(format!("vertex {u} is not assigned")));
        }
        Ok(Self::from_assignment(&raw))
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            count: n,
        }
    }

    pub fn single(n: usize) -> Self {
        Self {
            assignment: vec![0; n],
            count: usize::from(n > 0),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn cluster_of(&self, u: usize) -> usize {
        self.assignment[u]
    }

    #[inline]
    pub fn together(&self, u: usize, v: usize) -> bool {
        self.assignment[u] == self.assignment[v]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (u, &c) in self.assignment.iter().enumerate() {
            out[c].push(u);
        }
        out
    }

    fn check_covers(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(contract(format!(
                "clustering covers {} vertices, graph has {n}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// The norm exponent `q >= 1`, or the max norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    Finite(f64),
    Inf,
}

impl Norm {
    pub const L1: Norm = Norm::Finite(1.0);
    pub const L2: Norm = Norm::Finite(2.0);

    pub fn new(q: f64) -> Result<Self> {
        if q == f64::INFINITY {
            Ok(Norm::Inf)
        } else if q.is_finite() && q >= 1.0 {
            Ok(Norm::Finite(q))
        } else {
            Err(Error::UnsupportedConfig(format!(
                "norm exponent q = {q} must be >= 1"
            )))
        }
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Norm::Inf)
    }

    /// `q` as a float, `f64::INFINITY` for the max norm.
    pub fn q(self) -> f64 {
        match self {
            Norm::Finite(q) => q,
            Norm::Inf => f64::INFINITY,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Finite(q) => write!(f, "{q}"),
            Norm::Inf => f.write_str("inf"),
        }
    }
}

/// `(sum_u x_u^q)^(1/q)`, or `max_u x_u` for [`Norm::Inf`].
pub fn lq_norm(values: &[f64], q: Norm) -> f64 {
    let max = values.iter().copied().fold(0.0_f64, f64::max);
    match q {
        Norm::Inf => max,
        Norm::Finite(1.0) => values.iter().sum(),
        Norm::Finite(q) => {
            if max == 0.0 {
                return 0.0;
            }
            // scaled by the max entry so large q does not overflow
            let s: f64 = values.iter().map(|&x| math::powf(x / max, q)).sum();
            max * math::powf(s, 1.0 / q)
        }
    }
}

/// Per-vertex weight of disagreeing (or cut) edges.
///
/// Infinite edges are not summed; if one disagrees the vector is marked
/// `infeasible` and its norm is `+inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisagreeVector {
    pub values: Vec<f64>,
    pub infeasible: bool,
}

impl DisagreeVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            infeasible: false,
        }
    }

    pub fn norm(&self, q: Norm) -> f64 {
        if self.infeasible {
            f64::INFINITY
        } else {
            lq_norm(&self.values, q)
        }
    }

    /// The norm over the vertices with `mask[u] == true` only.
    pub fn norm_on(&self, q: Norm, mask: &[bool]) -> f64 {
        if self.infeasible {
            return f64::INFINITY;
        }
        let vals: Vec<f64> = self
            .values
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(&x, _)| x)
            .collect();
        lq_norm(&vals, q)
    }

    fn add(&mut self, e: &Edge) {
        if e.infinite {
            self.infeasible = true;
        } else {
            self.values[e.u] += e.weight;
            self.values[e.v] += e.weight;
        }
    }
}

/// Weight of disagreeing edges incident to each vertex.
pub fn disagreement_vector(g: &SignedGraph, c: &Clustering) -> Result<DisagreeVector> {
    c.check_covers(g.n())?;
    let mut out = DisagreeVector::zeros(g.n());
    for e in g.edges() {
        if e.disagrees(c.together(e.u, e.v)) {
            out.add(e);
        }
    }
    Ok(out)
}

/// Weight of edges of `edges` separated by `c`, per vertex. The vertex set is
/// the one covered by `c`.
pub fn cut_vector(edges: &[Edge], c: &Clustering) -> Result<DisagreeVector> {
    let n = c.len();
    let mut out = DisagreeVector::zeros(n);
    for e in edges {
        if e.u >= n || e.v >= n {
            return Err(contract(format!(
                "edge ({}, {}) outside clustering",
                e.u, e.v
            )));
        }
        if !c.together(e.u, e.v) {
            out.add(e);
        }
    }
    Ok(out)
}

/// Which vertices the objective is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    All,
    /// Only the L side of the bipartition.
    Left,
}

pub fn objective(g: &SignedGraph, c: &Clustering, q: Norm, scope: Scope) -> Result<f64> {
    let d = disagreement_vector(g, c)?;
    match scope {
        Scope::All => Ok(d.norm(q)),
        Scope::Left => {
            let side = g
                .left_side()
                .ok_or_else(|| contract("one-sided objective needs a bipartition"))?;
            Ok(d.norm_on(q, side))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// E+ = {01, 12}, E- = {02}, unit weights.
    fn g3() -> SignedGraph {
        SignedGraph::new(
            3,
            vec![
                Edge::pos(0, 1, 1.0),
                Edge::pos(1, 2, 1.0),
                Edge::neg(0, 2, 1.0),
            ],
        )
        .unwrap()
    }

    /// Independent per-vertex count over all ordered pairs.
    fn naive_disagree(g: &SignedGraph, c: &Clustering) -> Vec<f64> {
        let lookup = g.pair_lookup();
        (0..g.n())
            .map(|u| {
                (0..g.n())
                    .filter_map(|v| lookup[u * g.n() + v].map(|i| (v, g.edges()[i])))
                    .filter(|(v, e)| match e.sign {
                        Sign::Pos => c.cluster_of(u) != c.cluster_of(*v),
                        Sign::Neg => c.cluster_of(u) == c.cluster_of(*v),
                    })
                    .map(|(_, e)| e.weight)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn g3_single_cluster() {
        let g = g3();
        let d = disagreement_vector(&g, &Clustering::single(3)).unwrap();
        assert_eq!(d.values, naive_disagree(&g, &Clustering::single(3)));
        assert_eq!(d.values, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn g3_singletons() {
        let g = g3();
        let c = Clustering::singletons(3);
        let d = disagreement_vector(&g, &c).unwrap();
        assert_eq!(d.values, naive_disagree(&g, &c));
        assert_eq!(d.values, vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn edgeless_graph_has_zero_vector() {
        let g = SignedGraph::new(4, vec![]).unwrap();
        for c in [Clustering::single(4), Clustering::singletons(4)] {
            assert_eq!(disagreement_vector(&g, &c).unwrap().values, vec![0.0; 4]);
            assert_eq!(objective(&g, &c, Norm::L2, Scope::All).unwrap(), 0.0);
        }
    }

    #[test]
    fn missing_vertex_is_contract_error() {
        let g = g3();
        let err = disagreement_vector(&g, &Clustering::single(2)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn cut_vector_examples() {
        let g = g3();
        let pos: Vec<Edge> = g.pos_edges().copied().collect();
        assert_eq!(
            cut_vector(&pos, &Clustering::single(3)).unwrap().values,
            vec![0.0; 3]
        );
        let c = Clustering::from_clusters(3, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(cut_vector(&pos, &c).unwrap().values, vec![0.0, 1.0, 1.0]);
        let path = [Edge::pos(0, 1, 3.0)];
        let d = cut_vector(&path, &Clustering::singletons(2)).unwrap();
        assert_eq!(d.values, vec![3.0, 3.0]);
    }

    #[test]
    fn norm_examples() {
        let v = [1.0, 0.0, 1.0];
        assert_eq!(lq_norm(&v, Norm::L1), 2.0);
        assert!((lq_norm(&v, Norm::L2) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(lq_norm(&[1.0, 2.0, 1.0], Norm::Inf), 2.0);
        assert!(Norm::new(0.5).is_err());
        assert!(Norm::new(f64::NAN).is_err());
        assert_eq!(Norm::new(f64::INFINITY).unwrap(), Norm::Inf);
    }

    #[test]
    fn objective_examples() {
        let g = g3();
        assert_eq!(
            objective(&g, &Clustering::single(3), Norm::L1, Scope::All).unwrap(),
            2.0
        );
        let k11 = SignedGraph::new(2, vec![Edge::pos(0, 1, 1.0)])
            .unwrap()
            .with_bipartition(&[0])
            .unwrap();
        let cut = Clustering::singletons(2);
        assert_eq!(objective(&k11, &cut, Norm::L1, Scope::Left).unwrap(), 1.0);
        assert!(matches!(
            objective(&g, &cut_three(), Norm::L1, Scope::Left),
            Err(Error::Contract(_))
        ));
    }

    fn cut_three() -> Clustering {
        Clustering::singletons(3)
    }

    #[test]
    fn infinite_edges_mark_infeasible() {
        let g = SignedGraph::new(
            3,
            vec![Edge::infinite(0, 1, Sign::Pos), Edge::pos(1, 2, 2.0)],
        )
        .unwrap();
        let c = Clustering::singletons(3);
        let d = disagreement_vector(&g, &c).unwrap();
        assert!(d.infeasible);
        assert_eq!(d.values, vec![0.0, 2.0, 2.0]);
        assert_eq!(d.norm(Norm::Inf), f64::INFINITY);
        let ok = Clustering::from_clusters(3, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(objective(&g, &ok, Norm::Inf, Scope::All).unwrap(), 2.0);
    }

    #[test]
    fn graph_invariants_are_enforced() {
        assert!(SignedGraph::new(2, vec![Edge::pos(0, 0, 1.0)]).is_err());
        assert!(SignedGraph::new(2, vec![Edge::pos(0, 2, 1.0)]).is_err());
        assert!(SignedGraph::new(2, vec![Edge::pos(0, 1, 1.0), Edge::neg(1, 0, 1.0)]).is_err());
        assert!(SignedGraph::new(2, vec![Edge::pos(0, 1, -1.0)]).is_err());
        assert!(SignedGraph::new(2, vec![Edge::pos(0, 1, f64::NAN)]).is_err());
        let g = SignedGraph::new(3, vec![Edge::pos(0, 1, 1.0), Edge::pos(0, 2, 1.0)]).unwrap();
        assert!(g.clone().with_bipartition(&[1]).is_err());
        assert!(g.clone().with_bipartition(&[0]).is_ok());
        assert!(g.clone().with_terminals(1, 1).is_err());
        assert!(g.with_terminals(0, 2).is_ok());
    }

    #[test]
    fn clustering_normalizes_ids() {
        let c = Clustering::from_assignment(&[7, 3, 7, 9]);
        assert_eq!(c.assignment(), &[0, 1, 0, 2]);
        assert_eq!(c.num_clusters(), 3);
        assert_eq!(c.clusters(), vec![vec![0, 2], vec![1], vec![3]]);
        assert!(Clustering::from_clusters(3, &[vec![0, 1]]).is_err());
        assert!(Clustering::from_clusters(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = SignedGraph> {
        (2usize..9).prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            proptest::collection::vec((0u8..3, 0.0f64..5.0), pairs).prop_map(move |layout| {
                let mut edges = Vec::new();
                let mut k = 0;
                for u in 0..n {
                    for v in u + 1..n {
                        let (kind, w) = layout[k];
                        k += 1;
                        match kind {
                            1 => edges.push(Edge::pos(u, v, w)),
                            2 => edges.push(Edge::neg(u, v, w)),
                            _ => {}
                        }
                    }
                }
                SignedGraph::new(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn l1_is_twice_disagreeing_weight(g in arb_graph(), raw in proptest::collection::vec(0usize..4, 9)) {
            let c = Clustering::from_assignment(&raw[..g.n()]);
            let d = disagreement_vector(&g, &c).unwrap();
            prop_assert_eq!(&d.values, &naive_disagree(&g, &c));
            let total: f64 = g.edges().iter().filter(|e| e.disagrees(c.together(e.u, e.v))).map(|e| e.weight).sum();
            prop_assert!((d.norm(Norm::L1) - 2.0 * total).abs() < 1e-9);
        }

        #[test]
        fn refinement_never_decreases_cut(g in arb_graph(), raw in proptest::collection::vec(0usize..3, 9), split in proptest::collection::vec(0usize..2, 9)) {
            let n = g.n();
            let coarse = Clustering::from_assignment(&raw[..n]);
            let fine_raw: Vec<usize> = (0..n).map(|u| 2 * raw[u] + split[u]).collect();
            let fine = Clustering::from_assignment(&fine_raw);
            let a = cut_vector(g.edges(), &coarse).unwrap();
            let b = cut_vector(g.edges(), &fine).unwrap();
            for u in 0..n {
                prop_assert!(b.values[u] >= a.values[u]);
            }
        }

        #[test]
        fn norm_is_monotone_and_subadditive(
            a in proptest::collection::vec(0.0f64..10.0, 1..12),
            bump in 0.0f64..3.0,
            q in 1.0f64..6.0,
        ) {
            let q = Norm::Finite(q);
            let b: Vec<f64> = a.iter().rev().copied().collect();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            prop_assert!(lq_norm(&sum, q) <= lq_norm(&a, q) + lq_norm(&b, q) + 1e-9);
            let mut bigger = a.clone();
            bigger[0] += bump;
            prop_assert!(lq_norm(&bigger, q) + 1e-12 >= lq_norm(&a, q));
            prop_assert!(lq_norm(&sum, Norm::Inf) <= lq_norm(&a, Norm::Inf) + lq_norm(&b, Norm::Inf) + 1e-12);
        }

        #[test]
        fn large_q_approaches_max(raw in proptest::collection::btree_set(1u32..10_000, 2..10)) {
            let v: Vec<f64> = raw.iter().map(|&x| f64::from(x) / 100.0).collect();
            let inf = lq_norm(&v, Norm::Inf);
            let big = lq_norm(&v, Norm::Finite(64.0));
            prop_assert!(big >= inf - 1e-12);
            prop_assert!(big <= 1.05 * inf);
        }
    }
}
