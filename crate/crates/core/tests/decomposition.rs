use corrclust_core::decomposition::{
    boundary_neighborhood, decompose, fallback_components, fallback_cut_bound, sample_padded,
    PaddedParams,
};
use corrclust_core::graph::cut_vector;
use corrclust_core::instances::{gen_weighted, random_metric};
use corrclust_core::seed::rng;
use corrclust_core::Norm;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn clusters_respect_the_diameter(n in 1usize..65, seed in any::<u64>(), delta in 0.05f64..1.5) {
        let m = random_metric(n, 1.0, seed);
        let c = sample_padded(&m, delta, &mut rng(seed ^ 5)).unwrap();
        for cluster in c.clusters() {
            for &u in &cluster {
                for &v in &cluster {
                    prop_assert!(m.d(u, v) <= delta);
                }
            }
        }
    }

    #[test]
    fn filtered_decomposition_is_deterministic_and_accepted(n in 1usize..40, seed in any::<u64>()) {
        let m = random_metric(n, 1.0, seed);
        let p = PaddedParams::new(n, 0.5).unwrap();
        let (c, trace) = decompose(&m, &p, seed).unwrap();
        prop_assert_eq!((c.clone(), trace.clone()), decompose(&m, &p, seed).unwrap());
        prop_assert!(trace.attempts.len() <= p.max_retries);
        if !trace.fallback {
            let last = trace.attempts.last().unwrap();
            prop_assert!(last.success);
            prop_assert_eq!(boundary_neighborhood(&m, &c, p.eps).len(), last.boundary_size);
            prop_assert!(last.boundary_size as f64 <= p.cap.floor());
        }
    }

    #[test]
    fn fallback_cut_is_within_its_bound(n in 2usize..20, seed in any::<u64>(), q in prop_oneof![Just(Norm::L1), Just(Norm::L2), Just(Norm::Inf)]) {
        let m = random_metric(n, 1.0, seed);
        let g = gen_weighted(n, 0.5, 0.6, 4.0, seed);
        let c = fallback_components(&m, 0.5).unwrap();
        for cluster in c.clusters() {
            for &u in &cluster {
                for &v in &cluster {
                    prop_assert!(m.d(u, v) <= 0.5);
                }
            }
        }
        let cut = cut_vector(g.edges(), &c).unwrap().norm(q);
        prop_assert!(cut <= fallback_cut_bound(&m, g.edges(), 0.5, q) + 1e-9);
    }
}
