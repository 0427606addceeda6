use corrclust_core::graph::{cut_vector, objective};
use corrclust_core::oracle::{opt_clustering, opt_separating_partition, opt_st_cut};
use corrclust_core::{Clustering, Edge, Norm, Scope, Sign, SignedGraph};
use proptest::prelude::*;

fn norms() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::L1), Just(Norm::L2), Just(Norm::Inf)]
}

/// A graph on `n` vertices with at most `max_edges` random signed, weighted edges.
fn graph(n: usize, max_edges: usize) -> impl Strategy<Value = SignedGraph> {
    proptest::collection::vec((0..n, 0..n, any::<bool>(), 1u8..4), 0..=max_edges).prop_map(
        move |raw| {
            let mut seen = std::collections::BTreeSet::new();
            let edges = raw
                .into_iter()
                .filter(|&(u, v, _, _)| u != v && seen.insert((u.min(v), u.max(v))))
                .map(|(u, v, pos, w)| {
                    Edge::new(u, v, if pos { Sign::Pos } else { Sign::Neg }, f64::from(w))
                })
                .collect();
            SignedGraph::new(n, edges).unwrap()
        },
    )
}

fn relabel(g: &SignedGraph, perm: &[usize]) -> SignedGraph {
    let edges = g
        .edges()
        .iter()
        .map(|e| Edge::new(perm[e.u], perm[e.v], e.sign, e.weight))
        .collect();
    SignedGraph::new(g.n(), edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn optimum_is_invariant_under_relabeling(g in (2usize..8).prop_flat_map(|n| graph(n, 14)), q in norms(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut corrclust_core::seed::rng(seed));
        let a = opt_clustering(&g, q, Scope::All).unwrap().value;
        let b = opt_clustering(&relabel(&g, &perm), q, Scope::All).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
    }

    #[test]
    fn optimum_beats_random_clusterings(g in (1usize..8).prop_flat_map(|n| graph(n, 14)), q in norms(), raw in proptest::collection::vec(0usize..4, 8)) {
        let best = opt_clustering(&g, q, Scope::All).unwrap();
        prop_assert!((objective(&g, &best.best, q, Scope::All).unwrap() - best.value).abs() < 1e-9);
        let c = Clustering::from_assignment(&raw[..g.n()]);
        prop_assert!(best.value <= objective(&g, &c, q, Scope::All).unwrap() + 1e-9);
    }

    #[test]
    fn two_parts_suffice(g in (3usize..9).prop_flat_map(|n| graph(n, 12)), q in norms()) {
        let (s, t) = (0, g.n() - 1);
        let two = opt_st_cut(&g, s, t, q).unwrap();
        let many = opt_separating_partition(&g, s, t, q).unwrap();
        prop_assert!((two.value - many.value).abs() <= 1e-9 * (1.0 + many.value));
        prop_assert!(!two.best.together(s, t));
        prop_assert!((cut_vector(g.edges(), &two.best).unwrap().norm(q) - two.value).abs() < 1e-9);
    }
}
