use corrclust_core::instances::{gen_random, gen_weighted, random_fractional};
use corrclust_core::relaxation::{
    build_program, check_feasible, embed_integral, solve, SolverConfig,
};
use corrclust_core::{Clustering, Norm};
use proptest::prelude::*;

/// Every set partition of `0..n` as a restricted growth string.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut a = vec![0usize; n];
    fn rec(i: usize, max: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == a.len() {
            out.push(a.clone());
            return;
        }
        for c in 0..=max + 1 {
            a[i] = c;
            rec(i + 1, max.max(c), a, out);
        }
    }
    if n == 0 {
        out.push(a);
    } else {
        rec(1, 0, &mut a, &mut out);
    }
    out
}

fn norms() -> impl Strategy<Value = Norm> {
    prop_oneof![
        Just(Norm::L1),
        Just(Norm::L2),
        Just(Norm::Inf),
        Just(Norm::Finite(3.0))
    ]
}

#[test]
fn partition_enumerator_counts_bell_numbers() {
    let bell = [1, 1, 2, 5, 15, 52, 203, 877];
    for (n, b) in bell.iter().enumerate() {
        assert_eq!(all_partitions(n).len(), *b);
    }
}

#[test]
fn doubling_breakpoints_on_a_vertex_between_tangents() {
    // at 18 breakpoints the linearized optimum alone sits between tangent
    // points and has a worse true objective than at 9
    let g = gen_weighted(5, 0.5, 0.8, 3.0, 2753359521170624286);
    let q = Norm::Finite(3.0);
    let coarse = solve(
        &g,
        q,
        &SolverConfig {
            breakpoints: 9,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    let fine = solve(
        &g,
        q,
        &SolverConfig {
            breakpoints: 18,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    assert!(fine.value <= coarse.value);
    assert!(fine.lower_bound >= coarse.lower_bound - 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lower_bound_is_below_every_clustering(n in 2usize..8, seed in any::<u64>(), q in norms(), weighted in any::<bool>()) {
        let g = if weighted { gen_weighted(n, 0.5, 0.7, 4.0, seed) } else { gen_random(n, 0.5, 0.8, seed) };
        let sol = solve(&g, q, &SolverConfig::default()).unwrap();
        for raw in all_partitions(n) {
            let c = Clustering::from_assignment(&raw);
            let integral = embed_integral(&c, &g, q).unwrap();
            prop_assert!(sol.lower_bound <= integral.value + 1e-7, "{} > {}", sol.lower_bound, integral.value);
        }
    }

    #[test]
    fn solutions_are_feasible(n in 2usize..16, seed in any::<u64>(), q in norms(), lazy in any::<bool>()) {
        let g = gen_weighted(n, 0.5, 0.6, 3.0, seed);
        let cfg = SolverConfig { lazy_triangles: lazy, ..SolverConfig::default() };
        let sol = solve(&g, q, &cfg).unwrap();
        prop_assert!(check_feasible(&sol, &g, q).is_empty());
        prop_assert!(sol.lower_bound <= sol.value);
    }

    #[test]
    fn tangents_never_overestimate(n in 2usize..10, seed in any::<u64>(), q in norms(), k in 2usize..40, with_z in any::<bool>()) {
        let g = gen_weighted(n, 0.5, 0.7, 3.0, seed);
        let cfg = SolverConfig { breakpoints: k, use_z: with_z, ..SolverConfig::default() };
        let Ok(program) = build_program(&g, q, &cfg) else {
            // the full program is finite-q only
            prop_assert!(with_z && q.is_inf());
            return Ok(());
        };
        let point = random_fractional(&g, q, with_z, seed ^ 1);
        prop_assert!(program.linearized_value(&point) <= point.value * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn doubling_breakpoints_does_not_widen_the_gap(n in 3usize..9, seed in any::<u64>(), k in 2usize..12, q in prop_oneof![Just(2.0), Just(3.0), Just(1.5)]) {
        let g = gen_weighted(n, 0.5, 0.8, 3.0, seed);
        let q = Norm::Finite(q);
        let coarse = solve(&g, q, &SolverConfig { breakpoints: k, ..SolverConfig::default() }).unwrap();
        let fine = solve(&g, q, &SolverConfig { breakpoints: 2 * k, ..SolverConfig::default() }).unwrap();
        let (gc, gf) = (coarse.value - coarse.lower_bound, fine.value - fine.lower_bound);
        prop_assert!(gf <= gc + 1e-6 * (1.0 + coarse.value), "{gf} > {gc}");
    }
}
