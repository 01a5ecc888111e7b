//! Parallel reachability over any storage backend: per-worker frontiers in
//! pseudo-BFS or pseudo-DFS order, deadlock detection, and clean
//! termination. The reported state, transition, and deadlock counts are
//! exact regardless of worker count, order, or balancing strategy; only the
//! visit order is relaxed.

mod backend;
mod coordinator;
mod frontier;
mod worker;

pub use backend::{Backend, Offer};
pub use coordinator::Coordinator;
pub use frontier::{Frontier, Order};
pub use worker::{Tally, WorkOutcome, MAX_DEADLOCK_SAMPLES};

use std::time::{Duration, Instant};

use crossbeam::utils::CachePadded;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::balance::{static_seed, srp_seed, BalanceStats, PollTable, Strategy};
use crate::models::Model;
use crate::storage::{snapshot_stats, StorageError, StorageStats};

use worker::Worker;

/// Iterations of the exploration loop between balancer interactions.
pub const DEFAULT_WORK_BUDGET: usize = 64;

#[derive(Debug, Clone)]
pub struct ExploreOptions {
    pub workers: usize,
    pub order: Order,
    pub strategy: Strategy,
    pub seed: u64,
    pub budget: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            workers: 1,
            order: Order::Bfs,
            strategy: Strategy::Srp,
            seed: 42,
            budget: DEFAULT_WORK_BUDGET,
        }
    }
}

/// Result of one exploration run.
#[derive(Debug)]
pub struct ExploreReport {
    pub model: String,
    pub storage: &'static str,
    pub workers: usize,
    pub order: Order,
    pub strategy: Strategy,
    /// Committed (inserted) states; equals the reachable-state count.
    pub states: u64,
    /// Successor evaluations; equals the transition count.
    pub transitions: u64,
    pub deadlocks: u64,
    pub deadlock_samples: Vec<Vec<u32>>,
    pub wall: Duration,
    /// Summed storage counters.
    pub totals: StorageStats,
    pub per_worker: Vec<StorageStats>,
    pub balance: BalanceStats,
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("{source}")]
    Storage {
        source: StorageError,
        /// Counts gathered before the failure stopped the run.
        partial: Box<ExploreReport>,
    },
}

/// Explore the model's full state space with `opts.workers` workers sharing
/// `backend`.
pub fn explore<B: Backend>(
    model: &dyn Model,
    backend: &B,
    opts: &ExploreOptions,
) -> Result<ExploreReport, ExploreError> {
    assert!(opts.workers >= 1, "need at least one worker");
    assert!(opts.budget >= 1, "work budget must be at least 1");
    assert_eq!(
        model.vector_len(),
        backend.vector_len(),
        "storage sized for a different vector length"
    );
    let workers = opts.workers;
    let start = Instant::now();
    let stats: Vec<CachePadded<StorageStats>> = (0..workers)
        .map(|_| CachePadded::new(StorageStats::new()))
        .collect();

    let mut seed_tally = Tally::default();
    let seeded = match opts.strategy {
        Strategy::Static => static_seed(
            model,
            backend,
            workers,
            opts.order,
            &stats[0],
            &mut seed_tally,
        ),
        Strategy::Srp => srp_seed(
            model,
            backend,
            workers,
            opts.order,
            &stats[0],
            &mut seed_tally,
        ),
    };
    let frontiers = match seeded {
        Ok(f) => f,
        Err(source) => {
            let partial = build_report(model, backend, opts, seed_tally, start, stats, vec![]);
            return Err(ExploreError::Storage {
                source,
                partial: Box::new(partial),
            });
        }
    };

    let coord = Coordinator::new(workers);
    let polls = PollTable::new(workers);
    let mut worker_states = backend.make_worker_states(workers);

    let outputs: Vec<worker::WorkerOutput<B::WorkerState>> = std::thread::scope(|scope| {
        let coord = &coord;
        let polls = &polls;
        let stats = &stats;
        let handles: Vec<_> = frontiers
            .into_iter()
            .zip(worker_states.drain(..))
            .enumerate()
            .map(|(id, (frontier, ws))| {
                scope.spawn(move || {
                    Worker {
                        id,
                        model,
                        backend,
                        ws,
                        frontier,
                        stats: &stats[id],
                        coord,
                        polls,
                        strategy: opts.strategy,
                        budget: opts.budget,
                        rng: ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(
                            (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
                        )),
                        tally: Tally::default(),
                        bstats: BalanceStats::default(),
                    }
                    .run()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("exploration worker panicked"))
            .collect()
    });

    let mut tally = seed_tally;
    let mut outputs_back = Vec::with_capacity(outputs.len());
    for (id, out) in outputs.into_iter().enumerate() {
        backend.finish_worker(id, out.ws);
        tally.absorb(out.tally);
        outputs_back.push(out.bstats);
    }
    let report = build_report(model, backend, opts, tally, start, stats, outputs_back);

    if let Some(source) = coord.take_failure() {
        return Err(ExploreError::Storage {
            source,
            partial: Box::new(report),
        });
    }
    debug_assert!(report.states <= report.transitions + 1);
    Ok(report)
}

fn build_report<B: Backend>(
    model: &dyn Model,
    backend: &B,
    opts: &ExploreOptions,
    tally: Tally,
    start: Instant,
    stats: Vec<CachePadded<StorageStats>>,
    balances: Vec<BalanceStats>,
) -> ExploreReport {
    let totals = snapshot_stats(stats.iter().map(|c| &**c));
    let mut balance = BalanceStats::default();
    for b in &balances {
        balance.absorb(b);
    }
    ExploreReport {
        model: model.name(),
        storage: backend.kind(),
        workers: opts.workers,
        order: opts.order,
        strategy: opts.strategy,
        states: tally.states,
        transitions: tally.transitions,
        deadlocks: tally.deadlocks,
        deadlock_samples: tally.deadlock_samples,
        wall: start.elapsed(),
        totals,
        per_worker: stats.into_iter().map(|c| c.into_inner()).collect(),
        balance,
    }
}
