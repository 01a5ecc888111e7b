//! Engine-facing storage abstraction. The shared tables answer a successor
//! offer directly; the partitioned store routes non-owned vectors to the
//! owner's queue and surfaces them again through `drain`.

use std::collections::HashSet;

use crate::storage::{
    FindOrPut, PartitionedStore, QueueFull, RegionLockedTable, StateTable, StorageError,
    StorageStats,
};

use super::coordinator::Coordinator;

/// What happened to an offered successor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Offer {
    /// Fresh vector, committed by this worker; push it on the local frontier.
    Inserted,
    /// Already known (here or at the owner).
    Found,
    /// Handed to the owning worker's queue; novelty is decided there.
    Routed,
    /// Owner queue full; make local progress and retry.
    Busy,
}

pub trait Backend: Sync {
    /// Worker-private storage state; the partitioned store keeps the owned
    /// hash set here so the hot path never touches a lock.
    type WorkerState: Send;

    fn kind(&self) -> &'static str;

    fn vector_len(&self) -> usize;

    /// Called once, after seeding and before workers spawn.
    fn make_worker_states(&self, workers: usize) -> Vec<Self::WorkerState>;

    /// Called after a worker finished, with its state handed back.
    fn finish_worker(&self, worker: usize, state: Self::WorkerState);

    fn offer(
        &self,
        worker: usize,
        ws: &mut Self::WorkerState,
        vector: &[u32],
        stats: &StorageStats,
        coord: &Coordinator,
    ) -> Result<Offer, StorageError>;

    /// Whether vectors can arrive through a queue for this worker.
    fn has_routed_work(&self, _worker: usize) -> bool {
        false
    }

    /// Pull routed vectors; `fresh` is invoked for each previously unseen
    /// one. Returns the number of vectors processed (fresh or duplicate).
    fn drain(
        &self,
        _worker: usize,
        _ws: &mut Self::WorkerState,
        _stats: &StorageStats,
        _coord: &Coordinator,
        _fresh: &mut dyn FnMut(Vec<u32>),
    ) -> usize {
        0
    }

    /// Single-threaded insert used by the seeding phase.
    fn seed_insert(&self, vector: &[u32], stats: &StorageStats) -> Result<FindOrPut, StorageError>;

    /// Membership after the run is quiescent. Verification helper.
    fn contains_quiescent(&self, vector: &[u32]) -> bool;
}

impl Backend for StateTable {
    type WorkerState = ();

    fn kind(&self) -> &'static str {
        "lockless"
    }

    fn vector_len(&self) -> usize {
        StateTable::vector_len(self)
    }

    fn make_worker_states(&self, workers: usize) -> Vec<()> {
        vec![(); workers]
    }

    fn finish_worker(&self, _worker: usize, _state: ()) {}

    fn offer(
        &self,
        _worker: usize,
        _ws: &mut (),
        vector: &[u32],
        stats: &StorageStats,
        _coord: &Coordinator,
    ) -> Result<Offer, StorageError> {
        Ok(match self.find_or_put(vector, stats)? {
            FindOrPut::Inserted => Offer::Inserted,
            FindOrPut::Found => Offer::Found,
        })
    }

    fn seed_insert(&self, vector: &[u32], stats: &StorageStats) -> Result<FindOrPut, StorageError> {
        self.find_or_put(vector, stats)
    }

    fn contains_quiescent(&self, vector: &[u32]) -> bool {
        self.contains(vector)
    }
}

impl Backend for RegionLockedTable {
    type WorkerState = ();

    fn kind(&self) -> &'static str {
        "region"
    }

    fn vector_len(&self) -> usize {
        RegionLockedTable::vector_len(self)
    }

    fn make_worker_states(&self, workers: usize) -> Vec<()> {
        vec![(); workers]
    }

    fn finish_worker(&self, _worker: usize, _state: ()) {}

    fn offer(
        &self,
        _worker: usize,
        _ws: &mut (),
        vector: &[u32],
        stats: &StorageStats,
        _coord: &Coordinator,
    ) -> Result<Offer, StorageError> {
        Ok(match self.find_or_put(vector, stats)? {
            FindOrPut::Inserted => Offer::Inserted,
            FindOrPut::Found => Offer::Found,
        })
    }

    fn seed_insert(&self, vector: &[u32], stats: &StorageStats) -> Result<FindOrPut, StorageError> {
        self.find_or_put(vector, stats)
    }

    fn contains_quiescent(&self, vector: &[u32]) -> bool {
        self.contains(vector)
    }
}

impl Backend for PartitionedStore {
    /// The worker's own partition set, moved out for lock-free use.
    type WorkerState = HashSet<Vec<u32>>;

    fn kind(&self) -> &'static str {
        "partitioned"
    }

    fn vector_len(&self) -> usize {
        PartitionedStore::vector_len(self)
    }

    fn make_worker_states(&self, workers: usize) -> Vec<HashSet<Vec<u32>>> {
        assert_eq!(workers, self.workers(), "store sized for a different run");
        (0..workers).map(|w| self.take_set(w)).collect()
    }

    fn finish_worker(&self, worker: usize, state: HashSet<Vec<u32>>) {
        self.put_set(worker, state);
    }

    fn offer(
        &self,
        worker: usize,
        ws: &mut HashSet<Vec<u32>>,
        vector: &[u32],
        stats: &StorageStats,
        coord: &Coordinator,
    ) -> Result<Offer, StorageError> {
        if self.owner(vector) == worker {
            stats.on_call();
            if ws.insert(vector.to_vec()) {
                stats.on_insert();
                Ok(Offer::Inserted)
            } else {
                Ok(Offer::Found)
            }
        } else {
            // Raise in-flight before the vector becomes receivable so
            // termination can never fire around a queued item.
            coord.add_in_flight();
            match self.submit(vector.to_vec()) {
                Ok(()) => Ok(Offer::Routed),
                Err(QueueFull(_)) => {
                    coord.remove_in_flight();
                    Ok(Offer::Busy)
                }
            }
        }
    }

    fn has_routed_work(&self, worker: usize) -> bool {
        // Cheap peek; the worker is the only consumer of its inbox.
        self.try_peek(worker)
    }

    fn drain(
        &self,
        worker: usize,
        ws: &mut HashSet<Vec<u32>>,
        stats: &StorageStats,
        coord: &Coordinator,
        fresh: &mut dyn FnMut(Vec<u32>),
    ) -> usize {
        let mut processed = 0;
        while let Some(v) = self.try_recv(worker) {
            processed += 1;
            stats.on_call();
            if ws.insert(v.clone()) {
                stats.on_insert();
                fresh(v);
            }
            // The item is fully absorbed (frontier updated by `fresh`).
            coord.remove_in_flight();
        }
        processed
    }

    fn seed_insert(&self, vector: &[u32], stats: &StorageStats) -> Result<FindOrPut, StorageError> {
        stats.on_call();
        let r = self.insert_owned(vector);
        if r == FindOrPut::Inserted {
            stats.on_insert();
        }
        Ok(r)
    }

    fn contains_quiescent(&self, vector: &[u32]) -> bool {
        self.contains(vector)
    }
}
