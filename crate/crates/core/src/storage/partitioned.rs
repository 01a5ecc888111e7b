//! Static partitioning: each vector is owned by exactly one worker, owners
//! keep private sequential hash sets, and non-owners hand vectors over
//! through bounded inbound queues.
//!
//! The private set of worker `w` must only be touched by `w`. The engine
//! takes a set out at worker start (`take_set`), works on it locally, and
//! puts it back at shutdown; the mutex only mediates that transfer and the
//! quiescent queries used by tests.

use std::collections::HashSet;
use std::sync::Mutex;

use crossbeam::queue::ArrayQueue;
use crossbeam::utils::CachePadded;

use crate::hashing::hash;

use super::FindOrPut;

/// Default bound of each inbound queue.
pub const DEFAULT_QUEUE_CAPACITY: usize = 1 << 16;

/// The worker that owns a vector: `hash(vector, 1) mod workers`.
#[inline]
pub fn owner_of(vector: &[u32], workers: usize) -> usize {
    assert!(workers >= 1);
    (hash(vector, 1).value % workers as u64) as usize
}

/// Inbound queue was full; the rejected vector is handed back so the
/// submitter can apply backpressure and retry.
#[derive(Debug)]
pub struct QueueFull(pub Vec<u32>);

struct Partition {
    inbox: ArrayQueue<Vec<u32>>,
    set: Mutex<HashSet<Vec<u32>>>,
}

pub struct PartitionedStore {
    vector_len: usize,
    slots: Box<[CachePadded<Partition>]>,
}

impl PartitionedStore {
    pub fn new(workers: usize, vector_len: usize) -> Self {
        Self::with_queue_capacity(workers, vector_len, DEFAULT_QUEUE_CAPACITY)
    }

    pub fn with_queue_capacity(workers: usize, vector_len: usize, capacity: usize) -> Self {
        assert!(workers >= 1);
        assert!(vector_len >= 1);
        assert!(capacity >= 1);
        let slots = (0..workers)
            .map(|_| {
                CachePadded::new(Partition {
                    inbox: ArrayQueue::new(capacity),
                    set: Mutex::new(HashSet::new()),
                })
            })
            .collect();
        PartitionedStore { vector_len, slots }
    }

    pub fn workers(&self) -> usize {
        self.slots.len()
    }

    pub fn vector_len(&self) -> usize {
        self.vector_len
    }

    #[inline]
    pub fn owner(&self, vector: &[u32]) -> usize {
        owner_of(vector, self.slots.len())
    }

    /// Queue a vector for its owner. Any thread may call this.
    pub fn submit(&self, vector: Vec<u32>) -> Result<(), QueueFull> {
        debug_assert_eq!(vector.len(), self.vector_len);
        let owner = self.owner(&vector);
        self.slots[owner].inbox.push(vector).map_err(QueueFull)
    }

    /// Pop one queued vector for `worker`. Single-consumer by convention:
    /// only the owning worker drains its inbox.
    pub fn try_recv(&self, worker: usize) -> Option<Vec<u32>> {
        self.slots[worker].inbox.pop()
    }

    /// Whether `worker`'s inbox currently holds anything.
    pub fn try_peek(&self, worker: usize) -> bool {
        !self.slots[worker].inbox.is_empty()
    }

    /// Move the private set out for local, lock-free use by its owner.
    pub fn take_set(&self, worker: usize) -> HashSet<Vec<u32>> {
        std::mem::take(&mut self.slots[worker].set.lock().unwrap())
    }

    /// Return the private set after the owner is done with it.
    pub fn put_set(&self, worker: usize, set: HashSet<Vec<u32>>) {
        *self.slots[worker].set.lock().unwrap() = set;
    }

    /// Drain `worker`'s inbox against its private set through the mutex,
    /// reporting each previously unseen vector. This is the standalone form
    /// used by tests and the seeding phase; the engine hot path operates on
    /// a taken-out set instead.
    pub fn drain<F: FnMut(Vec<u32>)>(&self, worker: usize, mut fresh: F) -> usize {
        let mut processed = 0;
        let mut set = self.slots[worker].set.lock().unwrap();
        while let Some(v) = self.slots[worker].inbox.pop() {
            processed += 1;
            if set.insert(v.clone()) {
                fresh(v);
            }
        }
        processed
    }

    /// Insert directly into the owner's set, bypassing the queue. For
    /// single-threaded phases (seeding) and tests.
    pub fn insert_owned(&self, vector: &[u32]) -> FindOrPut {
        let owner = self.owner(vector);
        let mut set = self.slots[owner].set.lock().unwrap();
        if set.insert(vector.to_vec()) {
            FindOrPut::Inserted
        } else {
            FindOrPut::Found
        }
    }

    /// Membership across all partitions. Quiescent use only.
    pub fn contains(&self, vector: &[u32]) -> bool {
        let owner = self.owner(vector);
        self.slots[owner].set.lock().unwrap().contains(vector)
    }

    /// Total committed vectors across partitions. Quiescent use only.
    pub fn committed(&self) -> usize {
        self.slots
            .iter()
            .map(|p| p.set.lock().unwrap().len())
            .sum()
    }

    /// Vectors waiting in inbound queues.
    pub fn queued(&self) -> usize {
        self.slots.iter().map(|p| p.inbox.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn owner_is_deterministic_and_single_for_one_worker() {
        let v = vec![3u32, 1, 4];
        assert_eq!(owner_of(&v, 1), 0);
        assert_eq!(owner_of(&v, 8), owner_of(&v, 8));
    }

    #[test]
    fn owners_spread_evenly() {
        // Histogram oracle: 10^5 random vectors over 8 owners, expected
        // 12500 each, tolerance +-1200.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut counts = [0u32; 8];
        for _ in 0..100_000 {
            let v = [rng.gen::<u32>(), rng.gen::<u32>()];
            counts[owner_of(&v, 8)] += 1;
        }
        for (owner, &c) in counts.iter().enumerate() {
            assert!(
                (11_300..=13_700).contains(&c),
                "owner {owner} got {c}, outside 12500 +- 1200"
            );
        }
    }

    #[test]
    fn submit_then_drain_reports_fresh_once() {
        let store = PartitionedStore::new(4, 2);
        let v = vec![5u32, 6];
        let owner = store.owner(&v);
        store.submit(v.clone()).unwrap();
        let mut fresh = Vec::new();
        store.drain(owner, |x| fresh.push(x));
        assert_eq!(fresh, vec![v.clone()]);
        // Submitting the same vector twice: the owner dedupes.
        store.submit(v.clone()).unwrap();
        store.submit(v.clone()).unwrap();
        let mut fresh = Vec::new();
        let processed = store.drain(owner, |x| fresh.push(x));
        assert_eq!(processed, 2);
        assert!(fresh.is_empty());
        assert_eq!(store.committed(), 1);
    }

    #[test]
    fn full_queue_signals_backpressure() {
        let store = PartitionedStore::with_queue_capacity(1, 1, 2);
        store.submit(vec![1]).unwrap();
        store.submit(vec![2]).unwrap();
        let back = store.submit(vec![3]).unwrap_err();
        assert_eq!(back.0, vec![3]);
        store.drain(0, |_| {});
        store.submit(vec![3]).unwrap();
    }

    #[test]
    fn take_and_put_round_trips_the_set() {
        let store = PartitionedStore::new(2, 1);
        store.insert_owned(&[7]);
        let owner = store.owner(&[7]);
        let mut set = store.take_set(owner);
        assert!(set.contains(&vec![7u32]));
        set.insert(vec![8]);
        store.put_set(owner, set);
        assert_eq!(store.committed(), 2);
    }
}
