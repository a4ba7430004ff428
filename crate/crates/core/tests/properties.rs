use proptest::prelude::*;
use ufl_core::harness::formats::{emit_json, emit_orlib, parse_json, parse_orlib};
use ufl_core::harness::generate::gen_two_level;
use ufl_core::{
    a1, brute_force_opt, gamma_zero, greedy_augment, jms, nearest_assignment, random_clustering, sparsen,
    Instance64, Relaxation, SupportGraph,
};

/// Euclidean instance from explicit points on a small integer grid.
fn euclidean() -> impl Strategy<Value = Instance64> {
    (1usize..6, 1usize..8).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec((0u8..10, 0u8..10), m),
            prop::collection::vec((0u8..10, 0u8..10), n),
            prop::collection::vec(0u8..20, m),
        )
            .prop_map(|(fs, cs, f)| {
                let c = fs
                    .iter()
                    .map(|&(fx, fy)| {
                        cs.iter()
                            .map(|&(cx, cy)| (f64::from(fx) - f64::from(cx)).hypot(f64::from(fy) - f64::from(cy)))
                            .collect()
                    })
                    .collect();
                Instance64::new(f.into_iter().map(|v| f64::from(v) / 4.0).collect(), c).unwrap()
            })
    })
}

fn open_subset(m: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<bool>(), m).prop_map(|bits| {
        let mut open: Vec<usize> = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        if open.is_empty() {
            open.push(0);
        }
        open
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nearest_assignment_is_cheapest_with_lowest_index(
        (inst, open) in euclidean().prop_flat_map(|i| { let m = i.num_facilities(); (Just(i), open_subset(m)) })
    ) {
        let sol = nearest_assignment(&inst, &open).unwrap();
        for (j, &i) in sol.assignment.iter().enumerate() {
            for &k in &open {
                prop_assert!(inst.cost(i, j) <= inst.cost(k, j));
                if inst.cost(i, j) == inst.cost(k, j) {
                    prop_assert!(i <= k);
                }
            }
        }
    }

    #[test]
    fn lp_sandwich(inst in euclidean()) {
        let rel = Relaxation::solve(&inst).unwrap();
        rel.primal.check_feasible().unwrap();
        rel.dual.check_feasible(&inst).unwrap();
        let opt = brute_force_opt(&inst).unwrap().total();
        let lp = rel.objective();
        prop_assert!((rel.dual.objective - lp).abs() <= 1e-7 * (1.0 + lp));
        prop_assert!(lp <= opt * (1.0 + 1e-9) + 1e-9);
        prop_assert!(jms(&inst).unwrap().total() >= opt - 1e-9);
        prop_assert!(a1(&inst, 1.6, 7).unwrap().total() >= opt - 1e-9);
    }

    #[test]
    fn augmentation_is_monotone_and_idempotent(
        (inst, open) in euclidean().prop_flat_map(|i| { let m = i.num_facilities(); (Just(i), open_subset(m)) })
    ) {
        let base = nearest_assignment(&inst, &open).unwrap();
        let out = greedy_augment(&inst, &base).unwrap();
        prop_assert!(out.total() <= base.total() + 1e-12);
        prop_assert!(base.open_set.iter().all(|&i| out.is_open(i)));
        prop_assert_eq!(greedy_augment(&inst, &out).unwrap(), out);
    }

    #[test]
    fn formats_round_trip(inst in euclidean()) {
        prop_assert_eq!(&parse_json::<f64>(&emit_json(&inst)).unwrap(), &inst);
        prop_assert_eq!(&parse_orlib::<f64>(&emit_orlib(&inst)).unwrap(), &inst);
    }

    #[test]
    fn sparsening_invariants_on_two_level(seed in any::<u64>(), gamma in 1.0f64..2.0) {
        let inst: Instance64 = gen_two_level(7, 10, 3, (1.0, 3.0), seed).unwrap();
        let rel = Relaxation::solve(&inst).unwrap();
        let sp = sparsen(&inst, &rel, gamma).unwrap();
        sp.check_invariants(&inst).unwrap();
        for j in 0..sp.num_clients() {
            let s = sp.stats[j];
            prop_assert!(s.avg_close <= s.max_close + 1e-9);
            prop_assert!(s.r_gamma >= -1e-9 && s.r_gamma <= 1.0 + 1e-9);
        }
        let opened: f64 = sp.merged_openings(inst.num_facilities()).iter().sum();
        let y: f64 = rel.primal.openings().iter().sum();
        prop_assert!(opened <= gamma * y + 1e-7);
    }

    #[test]
    fn random_clustering_is_valid(seed in any::<u64>(), inst_seed in 0u64..50) {
        let inst: Instance64 = gen_two_level(8, 12, 3, (1.0, 3.0), inst_seed).unwrap();
        let sp = sparsen(&inst, &Relaxation::solve(&inst).unwrap(), gamma_zero(1e-12)).unwrap();
        let graph = SupportGraph::from_sparsened(&sp);
        let clustering = random_clustering(&graph, seed);
        clustering.check(&graph).unwrap();
        prop_assert_eq!(clustering, random_clustering(&graph, seed));
    }
}
