use graphkern::spdag::{build_spdag, extend_gappy, path_set, rooted_paths, DEFAULT_MAX_PATHS};
use graphkern::{graphhopper_kernel, Graph, NodeKernel};
use proptest::prelude::*;

/// Undirected simple graph on 1..=max_n nodes with labels in 0..3.
fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let m = pairs.len();
        (
            Just(n),
            proptest::collection::vec(any::<bool>(), m),
            proptest::collection::vec(1u8..=3, m),
            proptest::collection::vec(0i64..3, n),
        )
            .prop_map(move |(n, keep, lens, labels)| {
                let edges: Vec<_> = pairs
                    .iter()
                    .zip(&keep)
                    .zip(&lens)
                    .filter(|((_, &k), _)| k)
                    .map(|((&(u, v), _), &l)| (u, v, l as f64))
                    .collect();
                Graph::from_edges(n, &edges, Some(labels), None).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn degrees_sum_to_twice_the_edges(g in graph(10)) {
        let sum: usize = (0..g.node_count()).map(|v| g.degree(v).unwrap()).sum();
        prop_assert_eq!(sum, 2 * g.edge_count());
    }

    #[test]
    fn degree_labels_stay_valid(g in graph(10)) {
        let d = g.with_degree_labels();
        prop_assert!(d.validate().is_ok());
        for v in 0..g.node_count() {
            prop_assert_eq!(d.label(v), Some(g.degree(v).unwrap() as i64));
        }
    }

    #[test]
    fn path_counts_match_enumeration(g in graph(8), s in 0usize..=3) {
        for root in 0..g.node_count() {
            let dag = extend_gappy(&build_spdag(&g, root).unwrap(), s).unwrap();
            let paths = dag.enumerate_paths(DEFAULT_MAX_PATHS).unwrap();
            prop_assert_eq!(path_set(&paths).len(), paths.len());
            let counts = dag.count_vectors().unwrap();
            for v in 0..g.node_count() {
                for i in 1..=counts.len() {
                    let ending = paths.iter().filter(|p| p.len() == i && *p.last().unwrap() == v).count() as u64;
                    prop_assert_eq!(counts.desc(v).get(i - 1).copied().unwrap_or(0), ending);
                }
            }
        }
    }

    #[test]
    fn larger_gaps_only_add_paths(g in graph(8), s in 0usize..3) {
        for root in 0..g.node_count() {
            let small = path_set(&rooted_paths(&g, root, s, DEFAULT_MAX_PATHS).unwrap());
            let large = path_set(&rooted_paths(&g, root, s + 1, DEFAULT_MAX_PATHS).unwrap());
            prop_assert!(small.is_subset(&large));
        }
    }

    #[test]
    fn self_kernel_is_positive(g in graph(8), s in 0usize..=2) {
        let k = graphhopper_kernel(&g, &g, s, &NodeKernel::Dirac).unwrap();
        prop_assert!(k >= g.node_count() as f64);
    }
}
