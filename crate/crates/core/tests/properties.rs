mod common;

use common::{random_coin, random_spec, random_state};
use num_complex::Complex64;
use proptest::prelude::*;
use qwalk::controllability::reachable_sets;
use qwalk::io::{parse_spec, parse_state, spec_to_json, state_to_json};
use qwalk::lie::{bracket, lie_closure, skew_hermitian_deviation, GeneratorBasis, DEFAULT_TOL};
use qwalk::synthesis::{spread_from_node, TargetSpread};
use qwalk::walk::unitarity_deviation;
use qwalk::{
    analyze, arbitrary_transfer, generator_basis, parity_check, reduced_connectivity_graph, shift_matrix,
    step, unitary_completion, verdicts_agree, CMatrix, WalkSpec, WalkState,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn controllable_spec(r: &mut ChaCha8Rng, max_n: usize, max_d: usize) -> WalkSpec {
    loop {
        let spec = random_spec(r, max_n, max_d);
        if analyze(&spec).unwrap().controllable {
            return spec;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_preserves_norm(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r, 8, 3);
        let psi = random_state(&mut r, spec.d(), spec.n());
        let out = step(&psi, &random_coin(&mut r, spec.d(), spec.n()), &spec).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        let total: f64 = out.position_probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_matches_explicit_matrices(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r, 8, 3);
        let psi = random_state(&mut r, spec.d(), spec.n());
        let coin = random_coin(&mut r, spec.d(), spec.n());
        let fast = step(&psi, &coin, &spec).unwrap();
        let dense = shift_matrix(&spec) * coin.matrix() * psi.to_vector();
        for (a, b) in fast.amps().iter().zip(dense.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        prop_assert!(unitarity_deviation(&coin.matrix()) < 1e-10);
    }

    #[test]
    fn shift_order_is_exact(seed in any::<u64>()) {
        let spec = random_spec(&mut rng(seed), 8, 3);
        let s = shift_matrix(&spec);
        let eye = CMatrix::identity(spec.dim(), spec.dim());
        let mut power = s.clone();
        for k in 1..spec.shift_order() {
            prop_assert!((&power - &eye).camax() > 0.5, "S^{} = I", k);
            power = &s * power;
        }
        prop_assert!((&power - &eye).camax() == 0.0);
    }

    #[test]
    fn reachability_symmetry_and_composition(seed in any::<u64>()) {
        let spec = random_spec(&mut rng(seed), 8, 3);
        let kmax = 2 * spec.n();
        let sets: Vec<_> = (0..spec.n()).map(|j| reachable_sets(&spec, j, kmax).unwrap()).collect();
        for j in 0..spec.n() {
            for k in 0..=kmax {
                for &l in &sets[j][k] {
                    prop_assert!(sets[l][k].contains(&j));
                    for s in 0..=kmax - k {
                        for &i in &sets[j][s] {
                            prop_assert!(sets[l][k + s].contains(&i));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn criteria_agree_and_partitions_match(seed in any::<u64>()) {
        let spec = random_spec(&mut rng(seed), 8, 3);
        let a = verdicts_agree(&spec).unwrap();
        prop_assert!(a.agree, "{:?}", spec);
        prop_assert!(a.partitions_match);
        let report = analyze(&spec).unwrap();
        prop_assert!(report.m == 1 || report.m == 2);
        prop_assert_eq!(report.component_sizes.iter().sum::<usize>(), spec.n());
        prop_assert_eq!(report.controllable, report.predicted_lie_dim == spec.dim() * spec.dim());
        prop_assert_eq!(report.m, parity_check(&spec, 0).unwrap().m);
    }

    #[test]
    fn report_depends_only_on_adjacency(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r, 8, 3);
        let mut perms: Vec<Vec<usize>> = spec.perms().iter().map(|p| p.as_slice().to_vec()).collect();
        perms.shuffle(&mut r);
        let relabelled = WalkSpec::validate(spec.n(), perms).unwrap();
        prop_assert_eq!(spec.adjacency(), relabelled.adjacency());
        let (a, b) = (analyze(&spec).unwrap(), analyze(&relabelled).unwrap());
        prop_assert_eq!(a.components, b.components);
        prop_assert_eq!(a.kappa, b.kappa);
        prop_assert_eq!(a.predicted_lie_dim, b.predicted_lie_dim);
    }

    #[test]
    fn completion_maps_src_to_dst(seed in any::<u64>(), d in 1usize..5) {
        let mut r = rng(seed);
        let src = random_state(&mut r, d, 1).into_amps();
        let dst = random_state(&mut r, d, 1).into_amps();
        let q = unitary_completion(&src, &dst).unwrap();
        prop_assert!(unitarity_deviation(&q) < 1e-10);
        for a in 0..d {
            let image: Complex64 = (0..d).map(|b| q[(a, b)] * src[b]).sum();
            prop_assert!((image - dst[a]).norm() < 1e-10);
        }
    }

    #[test]
    fn brackets_stay_skew_hermitian(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r, 6, 3);
        let basis = generator_basis(&spec);
        for _ in 0..10 {
            let a = &basis.mats[r.random_range(0..basis.len())];
            let b = &basis.mats[r.random_range(0..basis.len())];
            prop_assert!(skew_hermitian_deviation(&bracket(a, b)) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closure_ignores_scaling_and_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = loop {
            let s = random_spec(&mut r, 5, 2);
            if s.dim() <= 10 {
                break s;
            }
        };
        let basis = generator_basis(&spec);
        let reference = lie_closure(&basis, DEFAULT_TOL).unwrap().dim;
        let mut mats: Vec<CMatrix> = basis
            .mats
            .iter()
            .map(|m| m * Complex64::new(r.random_range(0.1..10.0), 0.0))
            .collect();
        mats.shuffle(&mut r);
        let shuffled = GeneratorBasis::from_matrices(basis.size, mats);
        prop_assert_eq!(lie_closure(&shuffled, DEFAULT_TOL).unwrap().dim, reference);
        prop_assert_eq!(reference, analyze(&spec).unwrap().predicted_lie_dim);
    }

    #[test]
    fn transfer_reaches_target_within_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = controllable_spec(&mut r, 8, 3);
        let psi1 = random_state(&mut r, spec.d(), spec.n());
        let psi2 = random_state(&mut r, spec.d(), spec.n());
        let t = arbitrary_transfer(&spec, &psi1, &psi2, false).unwrap();
        prop_assert!(t.sequence.len() <= t.bound);
        prop_assert!(t.achieved_fidelity >= 1.0 - 1e-9);
        let replay = t.sequence.apply(&psi1, &spec).unwrap();
        prop_assert!(replay.fidelity(&psi2) >= 1.0 - 1e-9);
        for op in &t.sequence.ops {
            for q in op.blocks() {
                prop_assert!(unitarity_deviation(q) < 1e-10);
            }
        }
    }

    #[test]
    fn transfer_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = controllable_spec(&mut r, 7, 3);
        let psi1 = random_state(&mut r, spec.d(), spec.n());
        let psi2 = random_state(&mut r, spec.d(), spec.n());
        let there = arbitrary_transfer(&spec, &psi1, &psi2, false).unwrap();
        let mid = there.sequence.apply(&psi1, &spec).unwrap();
        let back = arbitrary_transfer(&spec, &mid, &psi1, false).unwrap();
        let end = back.sequence.apply(&mid, &spec).unwrap();
        prop_assert!(end.fidelity(&psi1) >= 1.0 - 1e-8);
    }

    #[test]
    fn spread_stays_inside_reachable_sets(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r, 8, 3);
        let j = r.random_range(0..spec.n());
        let k = r.random_range(1..=spec.n());
        let sets = reachable_sets(&spec, j, k).unwrap();
        let nodes: Vec<usize> = sets[k].iter().copied().filter(|_| r.random_bool(0.7)).collect();
        prop_assume!(!nodes.is_empty());
        let coeffs = random_state(&mut r, nodes.len(), 1).into_amps();
        let target = TargetSpread::new(nodes.clone(), coeffs.clone()).unwrap();
        let c0 = random_state(&mut r, spec.d(), 1).into_amps();
        let spread = spread_from_node(&spec, j, &c0, &target, k).unwrap();
        prop_assert_eq!(spread.sequence.len(), k);
        let mut psi = WalkState::localized(spec.n(), &c0, j).unwrap();
        for (t, op) in spread.sequence.ops.iter().enumerate() {
            psi = step(&psi, op, &spec).unwrap();
            for v in 0..spec.n() {
                if psi.vertex_weight(v) > 1e-12 {
                    prop_assert!(sets[t + 1].contains(&v));
                }
            }
        }
        for (v, a) in nodes.iter().zip(&coeffs) {
            prop_assert!((psi.vertex_weight(*v) - a.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn products_of_controllable_walks_are_controllable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = controllable_spec(&mut r, 5, 2);
        let b = controllable_spec(&mut r, 5, 2);
        let p = WalkSpec::product(&a, &b).unwrap();
        prop_assert!(analyze(&p).unwrap().controllable);
        prop_assert!(reduced_connectivity_graph(&p).is_connected());
    }

    #[test]
    fn json_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = random_spec(&mut r, 8, 3);
        prop_assert_eq!(parse_spec(&spec_to_json(&spec).to_string()).unwrap(), spec.clone());
        let psi = random_state(&mut r, spec.d(), spec.n());
        prop_assert_eq!(parse_state(&state_to_json(&psi).to_string()).unwrap(), psi);
    }
}
