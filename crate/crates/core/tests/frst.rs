use std::collections::HashSet;
use std::sync::Arc;

use flipforge_core::fixtures;
use flipforge_core::frst::{
    is_frst, sample_frsts, star_closure, Clock, LatticeConfig, Locator, SamplerConfig, StopReason,
};
use flipforge_core::{enumerate_component, regular_from_heights, CircuitTable, Exec, TriKey, Triangulation};

/// Every FRST in the flip-graph component of the pulling triangulation.
fn enumerated_frsts(lattice: &LatticeConfig) -> HashSet<TriKey> {
    let config = lattice.shared_config();
    let table = CircuitTable::build(Arc::clone(config));
    let seed = Triangulation::new(config.dim(), config.pulling_triangulation().iter().copied());
    let comp = enumerate_component(&seed, &table, usize::MAX, Exec::Auto);
    assert!(!comp.truncated);
    comp.states.iter().filter(|t| is_frst(t, lattice).is_frst()).map(Triangulation::key).collect()
}

fn lattices() -> Vec<(&'static str, LatticeConfig)> {
    vec![
        ("square", LatticeConfig::new(fixtures::lattice_square()).unwrap()),
        ("octahedron", LatticeConfig::from_polytope(&fixtures::octahedron_vertices()).unwrap()),
        ("square_pyramid", LatticeConfig::from_polytope(&fixtures::square_pyramid_vertices()).unwrap()),
    ]
}

#[test]
fn random_walk_sampler_recovers_all_frsts() {
    for (name, lattice) in lattices() {
        let truth = enumerated_frsts(&lattice);
        assert!(!truth.is_empty(), "{name}");
        let cfg = SamplerConfig { clock: Clock::Logical, seed: 7, ..Default::default() };
        let ledger = sample_frsts(&lattice, &cfg, Locator::RandomWalk);
        assert_eq!(ledger.stop, StopReason::RetryLimit, "{name}");
        assert_eq!(ledger.keys(), &truth, "{name}");
        for t in &ledger.frsts {
            assert!(is_frst(t, &lattice).is_frst());
        }
        let tail = &ledger.log[ledger.log.len() - cfg.retry_limit..];
        assert!(tail.iter().all(|e| e.new_key.is_none()));
    }
}

#[test]
fn known_frst_counts() {
    let counts: Vec<usize> = lattices().iter().map(|(_, l)| enumerated_frsts(l).len()).collect();
    assert_eq!(counts, vec![1, 1, 2]);
}

#[test]
fn closure_heights_are_a_witness() {
    for (_, lattice) in lattices() {
        let config = lattice.shared_config();
        let table = CircuitTable::build(Arc::clone(config));
        let seed = Triangulation::new(config.dim(), config.pulling_triangulation().iter().copied());
        for t in enumerate_component(&seed, &table, usize::MAX, Exec::Auto).states {
            let r = is_frst(&t, &lattice);
            if !(r.fine && r.regular) {
                continue;
            }
            let (closed, heights) = star_closure(&t, &lattice).unwrap();
            assert!(is_frst(&closed, &lattice).is_frst());
            assert_eq!(regular_from_heights(config, &heights).unwrap(), closed);
            let w = closed.regularity_witness(config).unwrap();
            assert_eq!(regular_from_heights(config, &w).unwrap(), closed);
        }
    }
}

#[test]
fn plain_lifting_only_tests_the_lift() {
    let lattice = LatticeConfig::new(fixtures::lattice_square()).unwrap();
    let cfg =
        SamplerConfig { clock: Clock::Logical, max_iterations: 40, retry_limit: 40, seed: 2, ..Default::default() };
    let ledger = sample_frsts(&lattice, &cfg, Locator::PlainLifting);
    assert!(ledger.len() <= 1);
    assert!(ledger.log.len() <= 40);
}

#[test]
fn ledgers_are_reproducible() {
    let lattice = LatticeConfig::from_polytope(&fixtures::square_pyramid_vertices()).unwrap();
    let cfg = SamplerConfig { clock: Clock::Logical, seed: 11, retry_limit: 10, ..Default::default() };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    sample_frsts(&lattice, &cfg, Locator::RandomWalk).write_jsonl(&mut a).unwrap();
    sample_frsts(&lattice, &cfg, Locator::RandomWalk).write_jsonl(&mut b).unwrap();
    assert_eq!(a, b);
}
