//! Instance generators: random signed graphs and metrics, the layered
//! integrality-gap family, and the 3SAT reduction graph.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, Norm, Sign, SignedGraph};
use crate::math;
use crate::metric::MetricSpace;
use crate::relaxation::FractionalSolution;
use crate::seed::rng;

/// Each pair is an edge with probability `p_edge`, positive with probability
/// `p_plus`; unit weights.
///
/// # Panics
/// If a probability is outside `[0, 1]`.
pub fn gen_random(n: usize, p_plus: f64, p_edge: f64, seed: u64) -> SignedGraph {
    gen_weighted(n, p_plus, p_edge, 1.0, seed)
}

/// As [`gen_random`] with weights uniform in `[1, max_weight]` (exactly 1
/// when `max_weight <= 1`).
pub fn gen_weighted(n: usize, p_plus: f64, p_edge: f64, max_weight: f64, seed: u64) -> SignedGraph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(p_edge) {
                let sign = if r.random_bool(p_plus) {
                    Sign::Pos
                } else {
                    Sign::Neg
                };
                let w = if max_weight > 1.0 {
                    r.random_range(1.0..=max_weight)
                } else {
                    1.0
                };
                edges.push(Edge::new(u, v, sign, w));
            }
        }
    }
    SignedGraph::new(n, edges).expect("generated pairs are distinct")
}

/// Complete bipartite graph with `L = 0..left`, `R = left..left+right`, unit weights.
pub fn gen_bipartite(left: usize, right: usize, p_plus: f64, seed: u64) -> SignedGraph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..left {
        for v in left..left + right {
            let sign = if r.random_bool(p_plus) {
                Sign::Pos
            } else {
                Sign::Neg
            };
            edges.push(Edge::new(u, v, sign, 1.0));
        }
    }
    let l: Vec<usize> = (0..left).collect();
    SignedGraph::new(left + right, edges)
        .and_then(|g| g.with_bipartition(&l))
        .expect("complete bipartite construction is valid")
}

/// Shortest-path closure of a random matrix with entries in `[0, scale]`.
/// Entries are `U^k` scaled, with `k` drawn per instance from `1..=3`, so some
/// metrics are clumpy and some are nearly uniform.
pub fn random_metric(n: usize, scale: f64, seed: u64) -> MetricSpace {
    let mut r = rng(seed);
    let k = r.random_range(1..=3);
    let mut d = vec![0.0; n * n];
    for u in 0..n {
        for v in u + 1..n {
            let x = math::powf(r.random_range(0.0..1.0), f64::from(k)) * scale;
            d[u * n + v] = x;
            d[v * n + u] = x;
        }
    }
    MetricSpace::closure(n, d, scale)
}

/// A random feasible point of the relaxation for `g`: a random metric in
/// `[0, 1]` completed with `y` (and `z`).
pub fn random_fractional(g: &SignedGraph, q: Norm, with_z: bool, seed: u64) -> FractionalSolution {
    let m = random_metric(g.n(), 1.0, seed);
    FractionalSolution::from_metric(g, q, m.matrix().to_vec(), with_z && !q.is_inf())
        .expect("dimensions match")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GapParams {
    /// Width of each complete bipartite layer.
    pub a: usize,
    /// Number of layers.
    pub b: usize,
}

impl GapParams {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::Contract(format!(
                "gap parameters a = {a}, b = {b} must be >= 1"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn num_vertices(self) -> usize {
        2 * self.a * self.b + self.b + 1
    }

    pub fn num_edges(self) -> usize {
        self.b * self.a * self.a + 2 * self.a * self.b
    }

    /// Vertex id of the separator `s_i`, `0 <= i <= b`.
    pub fn separator(self, i: usize) -> usize {
        i * (2 * self.a + 1)
    }

    /// Left and right sides of layer `i`, `1 <= i <= b`.
    pub fn layer(self, i: usize) -> (core::ops::Range<usize>, core::ops::Range<usize>) {
        let base = self.separator(i - 1) + 1;
        (base..base + self.a, base + self.a..base + 2 * self.a)
    }
}

/// Layers of `K_{a,a}` chained by separators: `s_{i-1}` is joined to the left
/// side of layer `i` and `s_i` to its right side. Terminals are `(s_0, s_b)`.
pub fn gen_gap(p: GapParams) -> SignedGraph {
    let mut edges = Vec::with_capacity(p.num_edges());
    for i in 1..=p.b {
        let (l, r) = p.layer(i);
        for u in l.clone() {
            edges.push(Edge::pos(p.separator(i - 1), u, 1.0));
            for v in r.clone() {
                edges.push(Edge::pos(u, v, 1.0));
            }
        }
        for v in r {
            edges.push(Edge::pos(v, p.separator(i), 1.0));
        }
    }
    SignedGraph::new(p.num_vertices(), edges)
        .and_then(|g| g.with_terminals(p.separator(0), p.separator(p.b)))
        .expect("gap construction is valid")
}

/// The spread-out fractional cut: every edge from a right side to the next
/// separator has length `1/b`, all others 0, and `x` is the shortest-path
/// metric. Returns the solution and `(ab (1/b)^q + b (a/b)^q)^(1/q)`.
pub fn gap_fractional(p: GapParams, q: Norm) -> Result<(FractionalSolution, f64)> {
    let Norm::Finite(qe) = q else {
        return Err(Error::UnsupportedConfig(
            "the gap construction is for finite q".into(),
        ));
    };
    let g = gen_gap(p);
    let n = g.n();
    // lengths in units of 1/b, so the path sums are exact integers
    let mut hops = vec![usize::MAX; n * n];
    for u in 0..n {
        hops[u * n + u] = 0;
    }
    // right side of layer i -> i, separator s_i -> i
    let mut right_of = vec![0usize; n];
    let mut sep_of = vec![0usize; n];
    for i in 1..=p.b {
        for v in p.layer(i).1 {
            right_of[v] = i;
        }
        sep_of[p.separator(i)] = i;
    }
    for e in g.edges() {
        let long = (right_of[e.u] != 0 && right_of[e.u] == sep_of[e.v])
            || (right_of[e.v] != 0 && right_of[e.v] == sep_of[e.u]);
        let len = usize::from(long);
        hops[e.u * n + e.v] = len;
        hops[e.v * n + e.u] = len;
    }
    for k in 0..n {
        for i in 0..n {
            let ik = hops[i * n + k];
            if ik == usize::MAX {
                continue;
            }
            for j in 0..n {
                let kj = hops[k * n + j];
                if kj != usize::MAX && ik + kj < hops[i * n + j] {
                    hops[i * n + j] = ik + kj;
                }
            }
        }
    }
    let b = p.b as f64;
    let x: Vec<f64> = hops.iter().map(|&h| h as f64 / b).collect();
    // k/b rounding can break a triangle by an ulp; the closure repairs it
    let x = MetricSpace::closure(n, x, 1.0);
    let sol = FractionalSolution::from_metric(&g, q, x.matrix().to_vec(), false)?;
    let (a, bf) = (p.a as f64, b);
    let value = math::powf(
        a * bf * math::powf(1.0 / bf, qe) + bf * math::powf(a / bf, qe),
        1.0 / qe,
    );
    Ok((sol, value))
}

/// A CNF formula; literal `+i` / `-i` is variable `i` (1-based) or its negation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for (j, c) in clauses.iter().enumerate() {
            if c.is_empty() || c.len() > 3 {
                return Err(Error::Contract(format!("clause {j} has width {}", c.len())));
            }
            for &l in c {
                let i = l.unsigned_abs() as usize;
                if l == 0 || i > num_vars {
                    return Err(Error::Contract(format!(
                        "clause {j}: literal {l} out of range"
                    )));
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn eval(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let val = assignment >> (l.unsigned_abs() - 1) & 1 == 1;
                val == (l > 0)
            })
        })
    }

    /// Tries all `2^n` assignments.
    pub fn is_satisfiable(&self) -> Result<bool> {
        const LIMIT: usize = 30;
        if self.num_vars > LIMIT {
            return Err(Error::SizeGuard {
                size: self.num_vars,
                limit: LIMIT,
            });
        }
        Ok((0..1u64 << self.num_vars).any(|a| self.eval(a)))
    }

    /// Every clause padded to width 3 by repeating its last literal.
    pub fn padded(&self) -> Vec<[i32; 3]> {
        self.clauses
            .iter()
            .map(|c| {
                let last = *c.last().expect("clauses are non-empty");
                [c[0], *c.get(1).unwrap_or(&last), *c.get(2).unwrap_or(&last)]
            })
            .collect()
    }
}

/// Vertex ids of the reduction graph.
pub mod layout {
    pub const TRUE: usize = 0;
    pub const FALSE: usize = 1;

    /// `x_i^T, x_i^F, x_i^dagger, not-x_i^dagger` for 0-based variable `i`.
    pub fn variable(i: usize) -> [usize; 4] {
        let b = 2 + 4 * i;
        [b, b + 1, b + 2, b + 3]
    }

    /// `y_1, y_2, y_3, C_a, C_b` for clause `j`.
    pub fn clause(num_vars: usize, j: usize) -> [usize; 5] {
        let b = 2 + 4 * num_vars + 5 * j;
        [b, b + 1, b + 2, b + 3, b + 4]
    }
}

/// The graph whose minimum `l_inf` True-False cut is 1 iff the formula is
/// satisfiable. All edges are positive; the `(True, x^T)`, `(False, x^F)` and
/// `(C_a, True)` edges are infinite. Terminals are `(True, False)`.
pub fn reduce_3sat(f: &CnfFormula) -> Result<SignedGraph> {
    if f.num_vars == 0 || f.clauses.is_empty() {
        return Err(Error::Contract("the formula is empty".into()));
    }
    let n = f.num_vars;
    let m = f.clauses.len();
    let mut edges = Vec::with_capacity(6 * n + 8 * m);
    for i in 0..n {
        let [t, fl, dag, ndag] = layout::variable(i);
        edges.push(Edge::infinite(layout::TRUE, t, Sign::Pos));
        edges.push(Edge::infinite(layout::FALSE, fl, Sign::Pos));
        for side in [t, fl] {
            edges.push(Edge::pos(side, dag, 1.0));
            edges.push(Edge::pos(side, ndag, 1.0));
        }
    }
    for (j, lits) in f.padded().iter().enumerate() {
        let [y1, y2, y3, ca, cb] = layout::clause(n, j);
        edges.push(Edge::pos(y2, cb, 1.0));
        edges.push(Edge::pos(y3, cb, 1.0));
        edges.push(Edge::pos(y1, ca, 1.0));
        edges.push(Edge::pos(cb, ca, 1.0));
        for (y, &l) in [y1, y2, y3].iter().zip(lits) {
            let [_, _, dag, ndag] = layout::variable(l.unsigned_abs() as usize - 1);
            edges.push(Edge::pos(*y, if l > 0 { dag } else { ndag }, 1.0));
        }
        edges.push(Edge::infinite(ca, layout::TRUE, Sign::Pos));
    }
    SignedGraph::new(2 + 4 * n + 5 * m, edges)?.with_terminals(layout::TRUE, layout::FALSE)
}
