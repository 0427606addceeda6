//! Exhaustive solvers for small instances.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{lq_norm, objective, Clustering, Norm, Scope, SignedGraph};
use crate::rounding::RoundingReport;

/// Largest `n` accepted by the partition enumerations (Bell(12) ~ 4.2e6).
pub const MAX_PARTITION_VERTICES: usize = 12;
/// Largest number of free components accepted by [`opt_st_cut`].
pub const MAX_CUT_COMPONENTS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub best: Clustering,
    pub value: f64,
    /// Number of candidates evaluated to completion.
    pub enumerated: u64,
}

/// Walks all restricted growth strings of length `n` depth first. `enter`
/// is called when vertex `i` gets a block and may veto the subtree, `leave`
/// undoes it, and `leaf` sees every complete string.
fn for_each_partition(
    n: usize,
    mut enter: impl FnMut(usize, &[usize]) -> bool,
    mut leave: impl FnMut(usize, &[usize]),
    mut leaf: impl FnMut(&[usize]),
) {
    if n == 0 {
        leaf(&[]);
        return;
    }
    let mut a = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    // explicit stack of (vertex, next block to try)
    let mut i = 0usize;
    let mut next = vec![0usize; n];
    loop {
        let limit = if i == 0 { 0 } else { maxes[i - 1] + 1 };
        if next[i] > limit {
            next[i] = 0;
            if i == 0 {
                return;
            }
            i -= 1;
            leave(i, &a[..=i]);
            continue;
        }
        a[i] = next[i];
        next[i] += 1;
        maxes[i] = if i == 0 { a[0] } else { maxes[i - 1].max(a[i]) };
        if !enter(i, &a[..=i]) {
            leave(i, &a[..=i]);
            continue;
        }
        if i + 1 == n {
            leaf(&a);
            leave(i, &a[..=i]);
        } else {
            i += 1;
        }
    }
}

fn scope_mask(g: &SignedGraph, scope: Scope) -> Result<Vec<bool>> {
    match scope {
        Scope::All => Ok(vec![true; g.n()]),
        Scope::Left => g
            .left_side()
            .map(<[bool]>::to_vec)
            .ok_or_else(|| Error::Contract("one-sided objective needs a bipartition".into())),
    }
}

/// Edges `(j, i, edge index)` with `j < i`, grouped by the larger endpoint.
fn back_edges(g: &SignedGraph) -> Vec<Vec<(usize, usize)>> {
    let mut back = vec![Vec::new(); g.n()];
    for (k, e) in g.edges().iter().enumerate() {
        back[e.v].push((e.u, k));
    }
    back
}

/// Minimizes the objective over every set partition, keeping the first optimum found.
pub fn opt_clustering(g: &SignedGraph, q: Norm, scope: Scope) -> Result<OracleResult> {
    opt_partition(g, q, scope, None, |e, together| e.disagrees(together))
}

/// Minimizes `||cut||_q` over every set partition that separates `s` from `t`.
/// Used to check that two-part cuts suffice.
pub fn opt_separating_partition(
    g: &SignedGraph,
    s: usize,
    t: usize,
    q: Norm,
) -> Result<OracleResult> {
    check_terminals(g, s, t)?;
    opt_partition(g, q, Scope::All, Some((s, t)), |_, together| !together)
}

fn opt_partition(
    g: &SignedGraph,
    q: Norm,
    scope: Scope,
    separate: Option<(usize, usize)>,
    counts: impl Fn(&crate::graph::Edge, bool) -> bool,
) -> Result<OracleResult> {
    let n = g.n();
    if n > MAX_PARTITION_VERTICES {
        return Err(Error::SizeGuard {
            size: n,
            limit: MAX_PARTITION_VERTICES,
        });
    }
    let mask = scope_mask(g, scope)?;
    let back = back_edges(g);
    let edges = g.edges();
    let mut load = vec![0.0; n];
    // infinite edges currently disagreeing
    let mut blocked = 0usize;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut enumerated = 0u64;
    let mut scratch = Vec::with_capacity(n);

    let running_max = |load: &[f64]| {
        load.iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(&x, _)| x)
            .fold(0.0, f64::max)
    };

    // enter, leave and leaf all update the same accumulators
    let state = core::cell::RefCell::new((&mut load, &mut blocked, &mut best));
    let apply = |i: usize, a: &[usize], sign: f64| {
        let mut st = state.borrow_mut();
        for &(j, k) in &back[i] {
            let e = &edges[k];
            if counts(e, a[i] == a[j]) {
                if e.infinite {
                    if sign > 0.0 {
                        *st.1 += 1;
                    } else {
                        *st.1 -= 1;
                    }
                } else {
                    st.0[i] += sign * e.weight;
                    st.0[j] += sign * e.weight;
                }
            }
        }
    };
    for_each_partition(
        n,
        |i, a| {
            apply(i, a, 1.0);
            let st = state.borrow();
            if *st.1 > 0 {
                return false;
            }
            if let Some((s, t)) = separate {
                if s <= i && t <= i && a[s] == a[t] {
                    return false;
                }
            }
            if let (Norm::Inf, Some((_, b))) = (q, st.2.as_ref()) {
                if running_max(st.0) >= *b {
                    return false;
                }
            }
            true
        },
        |i, a| apply(i, a, -1.0),
        |a| {
            enumerated += 1;
            let mut st = state.borrow_mut();
            scratch.clear();
            scratch.extend(st.0.iter().zip(&mask).filter(|(_, &m)| m).map(|(&x, _)| x));
            let v = lq_norm(&scratch, q);
            if st.2.as_ref().is_none_or(|(_, b)| v < *b) {
                *st.2 = Some((a.to_vec(), v));
            }
        },
    );
    let Some((raw, _)) = best else {
        return Err(Error::InfeasibleCut);
    };
    let best = Clustering::from_assignment(&raw);
    // report the value exactly as the public objective computes it
    let value = match separate {
        None => objective(g, &best, q, scope)?,
        Some(_) => crate::graph::cut_vector(g.edges(), &best)?.norm(q),
    };
    Ok(OracleResult {
        best,
        value,
        enumerated,
    })
}

fn check_terminals(g: &SignedGraph, s: usize, t: usize) -> Result<()> {
    if s >= g.n() || t >= g.n() || s == t {
        return Err(Error::Contract(format!(
            "terminals ({s}, {t}) must be distinct vertices"
        )));
    }
    Ok(())
}

/// Minimizes `||cut||_q` over two-part partitions `(A, V \ A)` with `s in A`,
/// `t not in A`. Infinite edges are contracted first, so no candidate cuts one.
pub fn opt_st_cut(g: &SignedGraph, s: usize, t: usize, q: Norm) -> Result<OracleResult> {
    check_terminals(g, s, t)?;
    let n = g.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in g.edges().iter().filter(|e| e.infinite) {
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let root: Vec<usize> = (0..n).map(|u| find(&mut parent, u)).collect();
    if root[s] == root[t] {
        return Err(Error::InfeasibleCut);
    }
    let mut free: Vec<usize> = root.clone();
    free.sort_unstable();
    free.dedup();
    free.retain(|&r| r != root[s] && r != root[t]);
    if free.len() > MAX_CUT_COMPONENTS {
        return Err(Error::SizeGuard {
            size: free.len(),
            limit: MAX_CUT_COMPONENTS,
        });
    }
    // bit of each vertex's component in the counter; s side is always in A
    let bit: Vec<Option<usize>> = root
        .iter()
        .map(|r| free.iter().position(|f| f == r))
        .collect();
    let finite: Vec<_> = g.edges().iter().filter(|e| !e.infinite).collect();
    let side = |mask: u64, u: usize| match bit[u] {
        Some(b) => mask >> b & 1 == 1,
        None => root[u] == root[s],
    };
    let mut load = vec![0.0; n];
    let mut best: Option<(u64, f64)> = None;
    let mut enumerated = 0u64;
    'candidates: for mask in 0..1u64 << free.len() {
        enumerated += 1;
        load.iter_mut().for_each(|x| *x = 0.0);
        for e in &finite {
            if side(mask, e.u) != side(mask, e.v) {
                load[e.u] += e.weight;
                load[e.v] += e.weight;
                if let (Norm::Inf, Some((_, b))) = (q, best) {
                    if load[e.u].max(load[e.v]) >= b {
                        continue 'candidates;
                    }
                }
            }
        }
        let v = lq_norm(&load, q);
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((mask, v));
        }
    }
    let (mask, _) = best.expect("at least one candidate");
    let assignment: Vec<usize> = (0..n).map(|u| usize::from(!side(mask, u))).collect();
    let best = Clustering::from_assignment(&assignment);
    let value = crate::graph::cut_vector(g.edges(), &best)?.norm(q);
    Ok(OracleResult {
        best,
        value,
        enumerated,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub opt: f64,
    /// `objective / opt` with `0/0 = 1`.
    pub ratio: f64,
    /// `max_u alg(u) / y(u)` from the report.
    pub per_vertex: f64,
}

pub fn verify_ratio(g: &SignedGraph, q: Norm, rounded: &RoundingReport) -> Result<RatioReport> {
    let opt = opt_clustering(g, q, rounded.scope)?.value;
    Ok(RatioReport {
        opt,
        ratio: ratio_or_one(rounded.objective, opt),
        per_vertex: rounded.ratio_per_vertex,
    })
}

/// `a / b` with `0/0 = 1` and `a/0 = inf`.
pub fn ratio_or_one(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Sign};
    use crate::instances::{gen_gap, gen_random, GapParams};

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

    /// Bell numbers via the triangle, against the enumeration count.
    #[test]
    fn enumerates_every_partition() {
        let mut row = vec![1u64];
        let mut bell = vec![1u64];
        for _ in 0..8 {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                let v = next.last().unwrap() + x;
                next.push(v);
            }
            bell.push(next[0]);
            row = next;
        }
        for (n, &b) in bell.iter().enumerate().take(9) {
            let g = SignedGraph::new(n, vec![]).unwrap();
            assert_eq!(
                opt_clustering(&g, Norm::L1, Scope::All).unwrap().enumerated,
                b,
                "n = {n}"
            );
        }
    }

    #[test]
    fn g3_optima() {
        let r = opt_clustering(&g3(), Norm::L1, Scope::All).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(
            opt_clustering(&g3(), Norm::Inf, Scope::All).unwrap().value,
            1.0
        );
    }

    #[test]
    fn consistent_instance_is_free() {
        let mut edges = Vec::new();
        for u in 0..6 {
            for v in u + 1..6 {
                let sign = if (u < 3) == (v < 3) {
                    Sign::Pos
                } else {
                    Sign::Neg
                };
                edges.push(Edge::new(u, v, sign, 1.0));
            }
        }
        let g = SignedGraph::new(6, edges).unwrap();
        for q in [Norm::L1, Norm::L2, Norm::Inf] {
            assert_eq!(opt_clustering(&g, q, Scope::All).unwrap().value, 0.0);
        }
    }

    #[test]
    fn guards() {
        let g = SignedGraph::new(13, vec![]).unwrap();
        assert!(matches!(
            opt_clustering(&g, Norm::L1, Scope::All),
            Err(Error::SizeGuard { .. })
        ));
        assert!(matches!(
            opt_clustering(&g3(), Norm::L1, Scope::Left),
            Err(Error::Contract(_))
        ));
        let g = SignedGraph::new(2, vec![Edge::infinite(0, 1, Sign::Pos)]).unwrap();
        assert!(matches!(
            opt_st_cut(&g, 0, 1, Norm::Inf),
            Err(Error::InfeasibleCut)
        ));
    }

    #[test]
    fn st_cut_examples() {
        let g = SignedGraph::new(2, vec![Edge::pos(0, 1, 1.0)]).unwrap();
        assert_eq!(opt_st_cut(&g, 0, 1, Norm::Inf).unwrap().value, 1.0);
        let g = gen_gap(GapParams::new(2, 2).unwrap());
        let (s, t) = g.terminals().unwrap();
        let r = opt_st_cut(&g, s, t, Norm::Inf).unwrap();
        assert_eq!(r.enumerated, 1 << 9);
        assert!(r.value >= 1.0);
    }

    #[test]
    fn q_inf_pruning_matches_plain_search() {
        for seed in 0..20 {
            let g = gen_random(7, 0.5, 0.8, seed);
            let pruned = opt_clustering(&g, Norm::Inf, Scope::All).unwrap();
            let plain = opt_clustering(&g, Norm::Finite(400.0), Scope::All).unwrap();
            assert!(pruned.enumerated < plain.enumerated || g.edges().is_empty());
            assert!(pruned.value <= plain.value + 1e-9);
        }
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(ratio_or_one(0.0, 0.0), 1.0);
        assert_eq!(ratio_or_one(1.0, 0.0), f64::INFINITY);
        assert_eq!(ratio_or_one(3.0, 2.0), 1.5);
    }
}
