use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flipforge_core::fixtures;
use flipforge_core::{apply_flip, enumerate_component, CircuitTable, Exec, PointConfig, Triangulation};

fn table(config: PointConfig) -> CircuitTable {
    CircuitTable::build(Arc::new(config))
}

fn pulling(table: &CircuitTable) -> Triangulation {
    let c = table.config();
    Triangulation::new(c.dim(), c.pulling_triangulation().iter().copied())
}

/// Checks every circuit against `tri`: at most one action, and the reverse
/// flip restores the key. Returns the number of pairs examined.
fn check_state(table: &CircuitTable, tri: &Triangulation) -> usize {
    for id in 0..table.len() {
        let actions = table.actions_for(tri, id);
        assert!(actions.len() <= 1, "circuit {id} offers {} flips", actions.len());
        for a in &actions {
            let next = apply_flip(tri, a).unwrap();
            assert!(next.validate(table.config()).is_valid());
            let back = apply_flip(&next, &a.reversed()).unwrap();
            assert_eq!(back.key(), tri.key());
            let again = table.actions_for(&next, id);
            assert_eq!(again.len(), 1, "the reverse flip must be available");
            assert_eq!(apply_flip(&next, &again[0]).unwrap().key(), tri.key());
        }
    }
    table.len()
}

#[test]
fn uniqueness_and_involution_over_whole_components() {
    let mut pairs = 0;
    for config in [
        fixtures::cube(),
        fixtures::bipyramid(),
        fixtures::cyclic(7, 4),
        fixtures::cyclic(8, 3),
        fixtures::cyclic(8, 4),
    ] {
        let t = table(config);
        let comp = enumerate_component(&pulling(&t), &t, 5000, Exec::Auto);
        for s in &comp.states {
            pairs += check_state(&t, s);
        }
    }
    assert!(pairs >= 10_000, "only {pairs} (state, circuit) pairs");
}

#[test]
fn flip_graph_is_symmetric() {
    let t = table(fixtures::cyclic(7, 4));
    let comp = enumerate_component(&pulling(&t), &t, usize::MAX, Exec::Sequential);
    let keys: HashSet<_> = comp.keys().into_iter().collect();
    for s in &comp.states {
        for n in t.neighbors(s) {
            assert!(keys.contains(&n.key()));
            assert!(t.neighbors(&n).iter().any(|m| m.key() == s.key()));
        }
    }
}

#[test]
fn parallel_and_sequential_enumeration_agree() {
    let t = table(fixtures::cube());
    let a = enumerate_component(&pulling(&t), &t, usize::MAX, Exec::Sequential);
    let b = enumerate_component(&pulling(&t), &t, usize::MAX, Exec::Parallel);
    assert_eq!(a.keys(), b.keys());
    assert_eq!(a.edges, b.edges);
}

fn fixture(i: usize) -> PointConfig {
    match i {
        0 => fixtures::cube(),
        1 => fixtures::cyclic(7, 4),
        2 => fixtures::cyclic(8, 3),
        3 => fixtures::cyclic(8, 4),
        _ => fixtures::bipyramid(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_walks_preserve_uniqueness(which in 0usize..5, seed in any::<u64>(), len in 1usize..40) {
        let t = table(fixture(which));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cur = pulling(&t);
        for _ in 0..len {
            check_state(&t, &cur);
            let actions = t.flippable(&cur);
            prop_assert!(!actions.is_empty());
            let circuits: HashSet<usize> = actions.iter().map(|a| a.circuit_id).collect();
            prop_assert_eq!(circuits.len(), actions.len());
            cur = t.apply(&cur, &actions[rng.random_range(0..actions.len())]).unwrap();
        }
    }
}
