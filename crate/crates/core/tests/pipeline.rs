use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use ufl_core::harness::generate::{gen_euclidean, gen_regular, gen_two_level};
use ufl_core::rounding::monte_carlo_with_plan;
use ufl_core::{
    a1, brute_force_opt, exact_center_probabilities, gamma_zero, greedy_augment, greedy_clustering, jms, scaled,
    sparsen, tiny1, A1Plan, BifactorBound, ClusteringStrategy, Instance32, Instance64, Relaxation, SupportGraph,
    UflAlgorithm,
};

fn g0() -> f64 {
    gamma_zero(1e-12)
}

#[test]
fn regular_instances_have_zero_irregularity() {
    for seed in 0..10 {
        let inst: Instance64 = gen_regular(9, 14, seed).unwrap();
        let relaxation = Relaxation::solve(&inst).unwrap();
        let sp = sparsen(&inst, &relaxation, g0()).unwrap();
        for (j, s) in sp.stats.iter().enumerate() {
            assert!(s.r_gamma <= 1e-6, "seed {seed} client {j}: r = {}", s.r_gamma);
        }
    }
}

#[test]
fn a1_on_regular_instances_is_feasible_and_above_optimum() {
    let inst: Instance64 = gen_regular(6, 9, 1).unwrap();
    let opt = brute_force_opt(&inst).unwrap().total();
    for seed in 0..50 {
        assert!(a1(&inst, g0(), seed).unwrap().total() >= opt - 1e-9);
    }
}

#[test]
fn greedy_centers_have_smaller_stats_than_members() {
    for seed in 0..30 {
        let inst: Instance64 = gen_two_level(10, 16, 3, (1.0, 3.0), seed).unwrap();
        let relaxation = Relaxation::solve(&inst).unwrap();
        let sp = sparsen(&inst, &relaxation, g0()).unwrap();
        let clustering = greedy_clustering(&sp);
        clustering.check(&SupportGraph::from_sparsened(&sp)).unwrap();
        assert_eq!(clustering, greedy_clustering(&sp));
        let key = |j: usize| sp.stats[j].avg_close + sp.stats[j].max_close;
        for (j, &c) in clustering.center_of.iter().enumerate() {
            assert!(key(c) <= key(j), "seed {seed}: center {c} of {j}");
        }
    }
}

#[test]
fn rounding_probabilities_match_theorem_constants() {
    let gamma = g0();
    for seed in 0..6 {
        let inst: Instance64 = gen_two_level(12, 20, 3, (1.0, 3.0), seed).unwrap();
        let plan = A1Plan::new(&inst, gamma, ClusteringStrategy::Greedy).unwrap();
        let d = monte_carlo_with_plan(&inst, &plan, 4000, seed).unwrap();
        let n = inst.num_clients() as f64;
        let se = |p: f64| (p * (1.0 - p) / (4000.0 * n)).sqrt().max(1e-9);
        let pc = d.mean_p_close();
        let ps = d.mean_p_none();
        assert!(pc >= 1.0 - (-1.0f64).exp() - 3.0 * se(pc), "p_c {pc}");
        assert!(ps <= (-gamma).exp() + 3.0 * se(ps), "p_s {ps}");
        assert!(d.mean_facility_cost <= d.bound_facility + 3.0 * d.std_error_facility());
        assert_eq!(d.exclusivity_violations, 0);
    }
}

#[test]
fn scaled_a1_respects_scaling_bound() {
    let delta = std::f64::consts::E;
    let bound = BifactorBound::a1(g0()).after_scaling(delta);
    for seed in 0..5 {
        let inst: Instance64 = gen_two_level(10, 16, 3, (1.0, 3.0), 70 + seed).unwrap();
        let shares = Relaxation::solve(&inst).unwrap().shares;
        let costs: Vec<f64> = (0..200)
            .map(|s| {
                let algo = scaled(move |i: &Instance64| a1(i, g0(), s), delta).unwrap();
                algo.solve(&inst).unwrap().total()
            })
            .collect();
        let mean = costs.iter().sum::<f64>() / 200.0;
        let sd = (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
        let limit = bound.evaluate(shares.total_facility, shares.total_connection);
        assert!(mean <= limit + 3.0 * sd / 200f64.sqrt(), "{mean} > {limit}");
    }
}

#[test]
fn augmentation_never_hurts_jms() {
    for seed in 0..20 {
        let inst: Instance64 = gen_euclidean(12, 25, (0.1, 1.0), seed).unwrap();
        let base = jms(&inst).unwrap();
        let out = greedy_augment(&inst, &base).unwrap();
        assert!(out.total() <= base.total() + 1e-12);
        assert_eq!(greedy_augment(&inst, &out).unwrap(), out);
    }
}

#[test]
fn single_precision_tracks_double() {
    for seed in 0..5 {
        let inst: Instance64 = gen_two_level(8, 12, 3, (1.0, 3.0), seed).unwrap();
        let small: Instance32 = inst.cast();
        let lp64 = Relaxation::solve(&inst).unwrap().objective();
        let lp32 = Relaxation::solve(&small).unwrap().objective() as f64;
        assert!((lp64 - lp32).abs() <= 1e-4 * lp64, "{lp64} vs {lp32}");
        let sp = sparsen(&small, &Relaxation::solve(&small).unwrap(), g0() as f32).unwrap();
        sp.check_invariants(&small).unwrap();
        assert!(jms(&small).unwrap().total() as f64 >= brute_force_opt(&inst).unwrap().total() - 1e-4);
    }
}

#[test]
fn exact_rational_probabilities_are_symmetric_stochastic() {
    let tiny: Instance64 = tiny1();
    let mut graphs = vec![SupportGraph::from_sparsened(
        &sparsen(&tiny, &Relaxation::solve(&tiny).unwrap(), 1.5).unwrap(),
    )];
    for seed in 0..6 {
        let inst: Instance64 = gen_two_level(6, 8, 3, (1.0, 3.0), seed).unwrap();
        graphs.push(SupportGraph::from_sparsened(
            &sparsen(&inst, &Relaxation::solve(&inst).unwrap(), g0()).unwrap(),
        ));
    }
    let one = BigRational::from_integer(BigInt::from(1));
    for g in &graphs {
        let p: Vec<Vec<BigRational>> = exact_center_probabilities(g).unwrap();
        for (j, row) in p.iter().enumerate() {
            let total = row.iter().fold(BigRational::zero(), |acc, x| acc + x);
            assert_eq!(total, one);
            for (jp, x) in row.iter().enumerate() {
                assert_eq!(x, &p[jp][j]);
                if j != jp && !g.are_neighbors(j, jp) {
                    assert!(x.is_zero());
                }
            }
        }
    }
}
