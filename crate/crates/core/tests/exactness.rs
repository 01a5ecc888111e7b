//! Cross-backend exactness: every storage, worker count, order, and
//! balancing strategy must report the oracle's counts, and the shared
//! tables must hold exactly the oracle's member set.

use std::collections::HashSet;
use std::path::Path;

use reachstore::models::{from_spec, load_ets, oracle_reach, Model};
use reachstore::reachability::{explore, ExploreOptions, Order};
use reachstore::storage::{PartitionedStore, RegionLockedTable, StateTable};
use reachstore::Strategy;

fn fixture(name: &str) -> Box<dyn Model> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    Box::new(load_ets(&path).unwrap())
}

fn opts(workers: usize, order: Order, strategy: Strategy, seed: u64) -> ExploreOptions {
    ExploreOptions {
        workers,
        order,
        strategy,
        seed,
        ..ExploreOptions::default()
    }
}

#[test]
fn fixtures_have_the_expected_shapes() {
    let chain = oracle_reach(fixture("chain5.ets").as_ref());
    assert_eq!(
        (chain.states, chain.transitions, chain.deadlocks),
        (6, 5, 1)
    );
    let forks = oracle_reach(fixture("forks.ets").as_ref());
    assert_eq!(
        (forks.states, forks.transitions, forks.deadlocks),
        (8, 9, 2)
    );
    let ring = oracle_reach(fixture("ring.ets").as_ref());
    assert_eq!((ring.states, ring.transitions, ring.deadlocks), (8, 9, 0));
}

#[test]
fn membership_equals_oracle_for_shared_tables() {
    let model = from_spec("hanoi:5").unwrap();
    let oracle = oracle_reach(model.as_ref());
    let table = StateTable::new(12, 5).unwrap();
    let r = explore(
        model.as_ref(),
        &table,
        &opts(4, Order::Bfs, Strategy::Srp, 1),
    )
    .unwrap();
    assert_eq!(r.states, oracle.states);
    let members: HashSet<Vec<u32>> = table.iter_vectors().collect();
    assert_eq!(members, oracle.members);

    let region = RegionLockedTable::new(12, 5).unwrap();
    explore(
        model.as_ref(),
        &region,
        &opts(4, Order::Dfs, Strategy::Static, 1),
    )
    .unwrap();
    let members: HashSet<Vec<u32>> = region.iter_vectors().collect();
    assert_eq!(members, oracle.members);
}

#[test]
fn partitioned_membership_equals_oracle() {
    let model = from_spec("phils:4").unwrap();
    let oracle = oracle_reach(model.as_ref());
    let store = PartitionedStore::new(4, 4);
    let r = explore(
        model.as_ref(),
        &store,
        &opts(4, Order::Bfs, Strategy::Srp, 3),
    )
    .unwrap();
    assert_eq!(r.states, oracle.states);
    assert_eq!(store.committed() as u64, oracle.states);
    for v in &oracle.members {
        assert!(store.contains(v));
    }
}

#[test]
fn quick_matrix_over_options() {
    // A fast slice of the full acceptance matrix for development feedback.
    for spec in ["hanoi:4", "phils:3", "diamond:3,4", "helix:4,50"] {
        let model = from_spec(spec).unwrap();
        let oracle = oracle_reach(model.as_ref());
        for (workers, order, strategy) in [
            (1, Order::Bfs, Strategy::Srp),
            (2, Order::Dfs, Strategy::Srp),
            (4, Order::Bfs, Strategy::Static),
            (3, Order::Dfs, Strategy::Static),
        ] {
            let table = StateTable::new(12, model.vector_len()).unwrap();
            let r = explore(model.as_ref(), &table, &opts(workers, order, strategy, 7)).unwrap();
            assert_eq!(r.states, oracle.states, "{spec} workers={workers}");
            assert_eq!(r.transitions, oracle.transitions, "{spec} workers={workers}");
            assert_eq!(r.deadlocks, oracle.deadlocks, "{spec} workers={workers}");
        }
    }
}

#[test]
fn srp_moves_work_on_starvation_prone_shapes() {
    // Helix convergence points starve most workers; random polling must
    // actually redistribute frontiers (and keep the counts exact).
    let model = from_spec("helix:4,2000").unwrap();
    let oracle = oracle_reach(model.as_ref());
    for seed in [1u64, 2, 3] {
        let table = StateTable::new(14, 2).unwrap();
        let r = explore(
            model.as_ref(),
            &table,
            &opts(8, Order::Bfs, Strategy::Srp, seed),
        )
        .unwrap();
        assert_eq!(r.states, oracle.states, "seed {seed}");
        assert!(
            r.balance.handoffs_received >= 1,
            "seed {seed}: no handoffs on a helix with 8 workers ({} polls)",
            r.balance.polls
        );
        assert_eq!(r.balance.states_given, r.balance.states_received);
    }
}

#[test]
fn tiny_queues_apply_backpressure_without_deadlock() {
    // Two-slot inbound queues force the submit/drain retry path.
    let model = from_spec("phils:4").unwrap();
    let oracle = oracle_reach(model.as_ref());
    let store = reachstore::storage::PartitionedStore::with_queue_capacity(2, 4, 2);
    let r = explore(
        model.as_ref(),
        &store,
        &opts(2, Order::Bfs, Strategy::Srp, 9),
    )
    .unwrap();
    assert_eq!(r.states, oracle.states);
    assert_eq!(r.transitions, oracle.transitions);
}

#[test]
fn hanoi3_under_partitioned_storage_is_27() {
    let model = from_spec("hanoi:3").unwrap();
    let store = PartitionedStore::new(2, 3);
    let r = explore(
        model.as_ref(),
        &store,
        &opts(2, Order::Bfs, Strategy::Srp, 5),
    )
    .unwrap();
    assert_eq!(r.states, 27);
}

#[test]
fn ets_round_trip_preserves_counts() {
    let model = from_spec("hanoi:2").unwrap();
    let mut buf = Vec::new();
    reachstore::models::export_ets(model.as_ref(), &mut buf).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hanoi2.ets");
    std::fs::write(&path, &buf).unwrap();
    let reloaded = from_spec(&format!("ets:{}", path.display())).unwrap();
    let a = oracle_reach(model.as_ref());
    let b = oracle_reach(reloaded.as_ref());
    assert_eq!(a.states, b.states);
    assert_eq!(a.transitions, b.transitions);
    assert_eq!(a.members, b.members);
}
