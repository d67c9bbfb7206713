//! Properties of the brute-force reference functions themselves.

mod common;

use proptest::prelude::*;

use simrel::io::random_lts;
use simrel::oracle::{
    self, block_simulation_holds, init_refine_reference, is_simulation, naive_coarsest_simulation,
    naive_coarsest_simulation_in_order, preorder_to_partition_relation, DeletionOrder,
    StateRelation,
};
use simrel::{normalize, Lts};

fn arb_lts() -> impl Strategy<Value = Lts> {
    (any::<u64>(), 1..=7usize, 1..=3usize, 1..=18usize)
        .prop_map(|(seed, n, k, t)| normalize(&random_lts(seed, n, k, t)).unwrap().0)
}

fn arb_relation(n: usize) -> impl Strategy<Value = StateRelation> {
    proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
        StateRelation::from_pairs(n, (0..n * n).filter(|&i| bits[i]).map(|i| (i / n, i % n)))
    })
}

/// An LTS with a random preorder over its states.
fn arb_lts_preorder() -> impl Strategy<Value = (Lts, StateRelation)> {
    arb_lts().prop_flat_map(|lts| {
        let n = lts.num_states();
        arb_relation(n).prop_map(move |r| (lts.clone(), r.reflexive_transitive_closure()))
    })
}

fn union_with(rel: &StateRelation, q: usize, r: usize) -> StateRelation {
    let mut out = rel.clone();
    out.insert(q, r);
    out
}

proptest! {
    #[test]
    fn fixpoint_is_a_simulation_and_a_preorder((lts, init) in arb_lts_preorder()) {
        let sim = naive_coarsest_simulation(&lts, &init);
        prop_assert!(is_simulation(&lts, &sim));
        prop_assert!(oracle::is_preorder(&sim));
        prop_assert!(sim.is_subset(&init));
    }

    #[test]
    fn fixpoint_is_locally_maximal((lts, init) in arb_lts_preorder()) {
        let sim = naive_coarsest_simulation(&lts, &init);
        for (q, r) in init.pairs().filter(|&(q, r)| !sim.contains(q, r)) {
            prop_assert!(!is_simulation(&lts, &union_with(&sim, q, r)), "({q}, {r}) could be added back");
        }
    }

    #[test]
    fn deletion_order_does_not_matter((lts, init) in arb_lts_preorder()) {
        prop_assert_eq!(
            naive_coarsest_simulation_in_order(&lts, &init, DeletionOrder::RowMajor),
            naive_coarsest_simulation_in_order(&lts, &init, DeletionOrder::ReverseRowMajor)
        );
    }

    #[test]
    fn init_refine_keeps_every_contained_simulation((lts, init) in arb_lts_preorder()) {
        let refined = init_refine_reference(&lts, &init);
        prop_assert!(oracle::is_preorder(&refined));
        prop_assert!(refined.is_subset(&init));
        prop_assert!(naive_coarsest_simulation(&lts, &init).is_subset(&refined));
        prop_assert_eq!(init_refine_reference(&lts, &refined), refined.clone());
        // the identity is a simulation contained in every preorder
        prop_assert!(StateRelation::identity(lts.num_states()).is_subset(&refined));
    }

    #[test]
    fn init_refine_maps_predecessors_into_enabled_states(
        (lts, init) in arb_lts_preorder(),
        mask_bits in any::<u16>(),
    ) {
        let n = lts.num_states();
        let refined = init_refine_reference(&lts, &init);
        let x: Vec<bool> = (0..n).map(|q| mask_bits >> q & 1 == 1).collect();
        let everything = vec![true; n];
        for a in 0..lts.num_letters() {
            let image = oracle::image(&refined, &oracle::pre_set(&lts, a, &x));
            let enabled = oracle::pre_set(&lts, a, &everything);
            prop_assert!((0..n).all(|q| !image[q] || enabled[q]));
        }
    }

    #[test]
    fn preorder_round_trips_through_blocks(rel in (1..=8usize).prop_flat_map(arb_relation)) {
        let preorder = rel.reflexive_transitive_closure();
        let (blocks, pairs) = preorder_to_partition_relation(&preorder).unwrap();
        prop_assert_eq!(oracle::induced(preorder.size(), &blocks, &pairs), preorder);
        prop_assert!(pairs.iter().all(|&(b, c)| b == c || !pairs.contains(&(c, b))));
    }

    #[test]
    fn block_condition_agrees_with_is_simulation((lts, rel) in arb_lts_preorder()) {
        let (blocks, pairs) = preorder_to_partition_relation(&rel).unwrap();
        prop_assert_eq!(block_simulation_holds(&lts, &blocks, &pairs), is_simulation(&lts, &rel));
    }
}

#[test]
fn non_preorders_are_rejected() {
    let rel = StateRelation::from_pairs(2, [(0, 1)]);
    assert!(preorder_to_partition_relation(&rel).is_err());
}

/// Adding any missing block pair to a coarsest simulation (inside a
/// universal initial relation) must be caught by the block condition.
#[test]
fn corrupted_results_are_detected() {
    let mut mutants = 0;
    let mut detected = 0;
    for seed in 0..common::CORPUS_SEEDS {
        let case = common::corpus_case(seed, common::InitKind::Universal);
        let sim = naive_coarsest_simulation(&case.lts, &case.initial_relation());
        let (blocks, pairs) = preorder_to_partition_relation(&sim).unwrap();
        assert!(block_simulation_holds(&case.lts, &blocks, &pairs));
        for b in 0..blocks.len() {
            for c in 0..blocks.len() {
                if pairs.contains(&(b, c)) {
                    continue;
                }
                let mut mutated = pairs.clone();
                mutated.push((b, c));
                mutants += 1;
                let induced = oracle::induced(case.lts.num_states(), &blocks, &mutated);
                assert!(
                    !is_simulation(&case.lts, &induced),
                    "seed {seed}: mutant ({b}, {c}) is a simulation"
                );
                if !block_simulation_holds(&case.lts, &blocks, &mutated) {
                    detected += 1;
                }
            }
        }
    }
    assert!(mutants > 1000, "only {mutants} mutants");
    assert_eq!(detected, mutants);
}
