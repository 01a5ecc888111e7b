//! The lockless find-or-put hash table.
//!
//! One atomic word per slot encodes empty / <memo, write> / <memo, done>.
//! Claiming an empty slot is a single CAS; the full vector goes into a
//! separated pre-allocated data array and the done bit is published with a
//! Release store. No memory is allocated after construction and nothing is
//! ever written on a lookup that finds its vector, so the memory working set
//! of a call is at most one bucket word plus the claimed slot's data cells.

use std::sync::atomic::Ordering;

use crate::hashing::{hash, index_of, memo_of, TableGeometry};

use super::{
    done_word, walk_the_line, word_is_done, word_memo, write_word, BucketState, FindOrPut,
    RawTable, StorageError, StorageStats, EMPTY_WORD,
};

/// Double-hash rounds before a call gives up with `TableFull`. At the
/// default eight slots per line this examines 8192 slots, which keeps the
/// failure odds negligible even at 99% fill while still turning a
/// mis-sized table into an error instead of a livelock.
pub const DEFAULT_MAX_ROUNDS: u32 = 1024;

/// Spins on a write-state bucket before yielding to the scheduler.
const SPINS_BEFORE_YIELD: u64 = 1 << 16;

/// Shared state table: `2^bits` bucket words plus `2^bits * vector_len`
/// data cells, allocated once at construction.
pub struct StateTable {
    raw: RawTable,
    max_rounds: u32,
}

impl StateTable {
    /// Table with the default cache-line probe window and round bound.
    pub fn new(bits: u32, vector_len: usize) -> Result<Self, StorageError> {
        Self::with_geometry(TableGeometry::new(bits)?, vector_len, DEFAULT_MAX_ROUNDS)
    }

    pub fn with_geometry(
        geom: TableGeometry,
        vector_len: usize,
        max_rounds: u32,
    ) -> Result<Self, StorageError> {
        assert!(max_rounds >= 1, "max_rounds must be at least 1");
        Ok(StateTable {
            raw: RawTable::new(geom, vector_len)?,
            max_rounds,
        })
    }

    #[inline]
    pub fn geometry(&self) -> &TableGeometry {
        self.raw.geom()
    }

    #[inline]
    pub fn vector_len(&self) -> usize {
        self.raw.vector_len()
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.raw.size()
    }

    pub fn max_rounds(&self) -> u32 {
        self.max_rounds
    }

    /// Insert `vector` if absent, report presence otherwise. Safe for any
    /// number of concurrent callers; the only blocking is a bounded spin
    /// when a probe hits a slot that is still being written.
    pub fn find_or_put(
        &self,
        vector: &[u32],
        stats: &StorageStats,
    ) -> Result<FindOrPut, StorageError> {
        assert_eq!(
            vector.len(),
            self.raw.vector_len(),
            "vector length does not match the table"
        );
        stats.on_call();
        let geom = *self.raw.geom();
        let memo = memo_of(hash(vector, 1));
        let claim = write_word(memo);
        let mut digest = hash(vector, 1);
        let mut probes = 0u64;
        for _ in 0..self.max_rounds {
            for slot in walk_the_line(index_of(digest, &geom), &geom) {
                probes += 1;
                let bucket = self.raw.bucket(slot);
                let mut word = bucket.load(Ordering::Acquire);
                if word == EMPTY_WORD {
                    match bucket.compare_exchange(
                        EMPTY_WORD,
                        claim,
                        Ordering::Acquire,
                        Ordering::Acquire,
                    ) {
                        Ok(_) => {
                            // The slot is ours. Readers ignore the data
                            // until the done bit is visible, and the
                            // Release below orders it after these writes.
                            self.raw.write_vector(slot, vector);
                            bucket.store(done_word(memo), Ordering::Release);
                            stats.on_insert();
                            stats.close_probe_run(probes);
                            return Ok(FindOrPut::Inserted);
                        }
                        Err(current) => {
                            // Lost the race; re-read and fall through to
                            // the occupied-slot handling.
                            stats.on_cas_failure();
                            word = current;
                        }
                    }
                }
                if word_memo(word) == memo {
                    if !word_is_done(word) {
                        stats.on_lock_wait();
                        self.wait_for_done(slot);
                    }
                    if self.raw.vector_equals(slot, vector) {
                        stats.close_probe_run(probes);
                        return Ok(FindOrPut::Found);
                    }
                    // Equal memo, different vector: a true hash collision.
                    // Keep probing.
                }
            }
            digest = hash(vector, digest.round + 1);
        }
        stats.on_rounds_exhausted();
        stats.close_probe_run(probes);
        Err(StorageError::TableFull {
            rounds: self.max_rounds,
        })
    }

    /// True iff a committed slot holds an equal vector. Read-only: never
    /// claims a slot, never writes.
    pub fn contains(&self, vector: &[u32]) -> bool {
        let stats = StorageStats::new();
        self.lookup(vector, &stats)
    }

    /// `contains` with probe accounting, for instrumented lookups.
    pub fn contains_counted(&self, vector: &[u32], stats: &StorageStats) -> bool {
        self.lookup(vector, stats)
    }

    fn lookup(&self, vector: &[u32], stats: &StorageStats) -> bool {
        assert_eq!(
            vector.len(),
            self.raw.vector_len(),
            "vector length does not match the table"
        );
        let geom = *self.raw.geom();
        let memo = memo_of(hash(vector, 1));
        let mut digest = hash(vector, 1);
        let mut probes = 0u64;
        for _ in 0..self.max_rounds {
            for slot in walk_the_line(index_of(digest, &geom), &geom) {
                probes += 1;
                let word = self.raw.bucket(slot).load(Ordering::Acquire);
                if word == EMPTY_WORD {
                    // Assignments are permanent, so an equal vector would
                    // occupy some slot before the first empty one in its
                    // own probe sequence.
                    stats.close_probe_run(probes);
                    return false;
                }
                if word_memo(word) == memo {
                    if !word_is_done(word) {
                        stats.on_lock_wait();
                        self.wait_for_done(slot);
                    }
                    if self.raw.vector_equals(slot, vector) {
                        stats.close_probe_run(probes);
                        return true;
                    }
                }
            }
            digest = hash(vector, digest.round + 1);
        }
        stats.close_probe_run(probes);
        false
    }

    /// Bounded spin until the slot's done bit is set. Writers finish in a
    /// handful of instructions, so stay on-core first and involve the
    /// scheduler only after `SPINS_BEFORE_YIELD` relax hints.
    fn wait_for_done(&self, slot: usize) {
        let bucket = self.raw.bucket(slot);
        let mut spent = 0u64;
        let mut batch = 1u32;
        loop {
            if word_is_done(bucket.load(Ordering::Acquire)) {
                return;
            }
            if spent < SPINS_BEFORE_YIELD {
                for _ in 0..batch {
                    std::hint::spin_loop();
                }
                spent += u64::from(batch);
                batch = (batch * 2).min(1 << 10);
            } else {
                std::thread::yield_now();
            }
        }
    }

    /// Decoded state of one bucket word, for sampling and verification.
    pub fn bucket_state(&self, slot: usize) -> BucketState {
        BucketState::decode(self.raw.bucket(slot).load(Ordering::Acquire))
    }

    /// All committed vectors, by slot order. Intended for verification at
    /// desk scale; scans the whole bucket array.
    pub fn iter_vectors(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.raw.size()).filter_map(move |slot| {
            match BucketState::decode(self.raw.bucket(slot).load(Ordering::Acquire)) {
                BucketState::Done { .. } => Some(self.raw.read_vector(slot)),
                _ => None,
            }
        })
    }

    /// Number of committed slots (full scan).
    pub fn committed(&self) -> usize {
        (0..self.raw.size())
            .filter(|&slot| {
                matches!(
                    BucketState::decode(self.raw.bucket(slot).load(Ordering::Acquire)),
                    BucketState::Done { .. }
                )
            })
            .count()
    }

    #[cfg(test)]
    pub(crate) fn raw(&self) -> &RawTable {
        &self.raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::MEMO_BITS;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;
    use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
    use std::sync::Barrier;

    fn table(bits: u32, len: usize) -> StateTable {
        StateTable::new(bits, len).unwrap()
    }

    #[test]
    fn construction_shapes_and_limits() {
        let t = table(10, 3);
        assert_eq!(t.size(), 1024);
        assert_eq!(t.vector_len(), 3);
        assert_eq!(t.committed(), 0);
        for slot in 0..t.size() {
            assert_eq!(t.bucket_state(slot), BucketState::Empty);
        }
        assert!(matches!(
            StateTable::new(3, 3),
            Err(StorageError::Geometry(_))
        ));
        assert!(matches!(
            StateTable::new(10, 0),
            Err(StorageError::InvalidVectorLen)
        ));
    }

    #[test]
    #[ignore = "needs about 11 GiB free: 2^28 slots * (8 + 32) bytes"]
    fn construction_at_2_pow_28() {
        let t = StateTable::new(28, 8).unwrap();
        assert_eq!(t.size(), 1 << 28);
    }

    #[test]
    fn insert_then_find() {
        let t = table(10, 3);
        let stats = StorageStats::new();
        let v = [1u32, 2, 3];
        assert_eq!(t.find_or_put(&v, &stats).unwrap(), FindOrPut::Inserted);
        assert_eq!(t.find_or_put(&v, &stats).unwrap(), FindOrPut::Found);
        assert_eq!(stats.fop_calls(), 2);
        assert_eq!(stats.inserts(), 1);
        assert_eq!(stats.lock_waits(), 0);
    }

    #[test]
    fn contains_tracks_membership() {
        let t = table(10, 2);
        let stats = StorageStats::new();
        assert!(!t.contains(&[7, 7]));
        t.find_or_put(&[7, 7], &stats).unwrap();
        assert!(t.contains(&[7, 7]));
        assert!(!t.contains(&[7, 8]));
    }

    #[test]
    fn contains_matches_oracle_set() {
        let t = table(14, 2);
        let stats = StorageStats::new();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut oracle: HashSet<[u32; 2]> = HashSet::new();
        for _ in 0..4000 {
            let v = [rng.gen_range(0..200u32), rng.gen_range(0..200u32)];
            let r = t.find_or_put(&v, &stats).unwrap();
            assert_eq!(r == FindOrPut::Inserted, oracle.insert(v));
        }
        for _ in 0..10_000 {
            let v = [rng.gen_range(0..220u32), rng.gen_range(0..220u32)];
            assert_eq!(t.contains(&v), oracle.contains(&v));
        }
        assert_eq!(t.committed(), oracle.len());
    }

    #[test]
    fn sequential_run_never_lock_waits() {
        let t = table(12, 2);
        let stats = StorageStats::new();
        for i in 0..1000u32 {
            t.find_or_put(&[i, i], &stats).unwrap();
        }
        assert_eq!(stats.fop_calls(), 1000);
        assert_eq!(stats.inserts(), 1000);
        assert_eq!(stats.lock_waits(), 0);
        assert_eq!(stats.cas_failures(), 0);
        assert!(stats.max_probe() <= stats.probes_total());
    }

    #[test]
    fn table_full_is_reported_not_looped() {
        // 16 slots, bounded rounds: the 17th distinct vector must fail.
        let geom = TableGeometry::with_line_slots(4, 8).unwrap();
        let t = StateTable::with_geometry(geom, 1, 8).unwrap();
        let stats = StorageStats::new();
        let mut inserted = 0;
        let mut full = false;
        for i in 0..32u32 {
            match t.find_or_put(&[i], &stats) {
                Ok(FindOrPut::Inserted) => inserted += 1,
                Ok(FindOrPut::Found) => unreachable!("distinct vectors"),
                Err(StorageError::TableFull { rounds }) => {
                    assert_eq!(rounds, 8);
                    full = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(full, "a 16-slot table must fill up within 32 inserts");
        assert_eq!(inserted, 16, "every slot should be usable before full");
        assert_eq!(stats.rounds_exhausted(), 1);
    }

    #[test]
    fn found_writes_nothing() {
        let t = table(10, 4);
        let stats = StorageStats::new();
        let v = [9u32, 8, 7, 6];
        t.find_or_put(&v, &stats).unwrap();
        let words: Vec<BucketState> = (0..t.size()).map(|s| t.bucket_state(s)).collect();
        for _ in 0..100 {
            assert_eq!(t.find_or_put(&v, &stats).unwrap(), FindOrPut::Found);
        }
        let after: Vec<BucketState> = (0..t.size()).map(|s| t.bucket_state(s)).collect();
        assert_eq!(words, after, "found must leave every bucket word intact");
        assert_eq!(stats.inserts(), 1);
    }

    #[test]
    fn exactly_one_insert_wins_a_race() {
        // T workers race find_or_put on the same vector; exactly one may
        // claim it, every other call reports found.
        let t = table(10, 3);
        let workers = 8;
        for round in 0..50u32 {
            let v = [round, round ^ 0xAA, 3];
            let barrier = Barrier::new(workers);
            let inserted = AtomicUsize::new(0);
            std::thread::scope(|s| {
                for _ in 0..workers {
                    s.spawn(|| {
                        let stats = StorageStats::new();
                        barrier.wait();
                        if t.find_or_put(&v, &stats).unwrap() == FindOrPut::Inserted {
                            inserted.fetch_add(1, Ordering::Relaxed);
                        }
                    });
                }
            });
            assert_eq!(inserted.load(Ordering::Relaxed), 1);
        }
    }

    #[test]
    fn concurrent_inserts_match_sequential_oracle() {
        // 10^5 distinct vectors, each attempted by 2 of 8 workers.
        let t = table(18, 2);
        let n = 100_000u32;
        let workers = 8;
        let inserted = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for w in 0..workers {
                let t = &t;
                let inserted = &inserted;
                s.spawn(move || {
                    let stats = StorageStats::new();
                    // Workers w and w+4 both attempt vector group w % 4.
                    let group = (w % 4) as u32;
                    let mut local = 0usize;
                    for i in 0..n / 4 {
                        let v = [group * (n / 4) + i, 0xBEEF];
                        if t.find_or_put(&v, &stats).unwrap() == FindOrPut::Inserted {
                            local += 1;
                        }
                    }
                    inserted.fetch_add(local, Ordering::Relaxed);
                });
            }
        });
        assert_eq!(inserted.load(Ordering::Relaxed), n as usize);
        assert_eq!(t.committed(), n as usize);
        let members: HashSet<Vec<u32>> = t.iter_vectors().collect();
        let expected: HashSet<Vec<u32>> = (0..n).map(|i| vec![i, 0xBEEF]).collect();
        assert_eq!(members, expected);
    }

    #[test]
    fn bucket_words_move_monotonically() {
        // Sample bucket words while 4 writers fill the table; a word may
        // only go empty -> write -> done and the memo must never change.
        let t = table(12, 2);
        let stop = AtomicBool::new(false);
        std::thread::scope(|s| {
            let t = &t;
            let stop = &stop;
            let sampler = s.spawn(move || {
                let mut last = vec![BucketState::Empty; t.size()];
                let mut rng = ChaCha8Rng::seed_from_u64(5);
                while !stop.load(Ordering::Relaxed) {
                    let slot = rng.gen_range(0..t.size());
                    let now = t.bucket_state(slot);
                    match (last[slot], now) {
                        (BucketState::Empty, _) => {}
                        (BucketState::Write { memo: a }, BucketState::Write { memo: b })
                        | (BucketState::Write { memo: a }, BucketState::Done { memo: b })
                        | (BucketState::Done { memo: a }, BucketState::Done { memo: b }) => {
                            assert_eq!(a, b, "memo changed after claim");
                        }
                        (before, after) => {
                            panic!("illegal bucket transition {before:?} -> {after:?}")
                        }
                    }
                    last[slot] = now;
                }
            });
            for w in 0..4u32 {
                s.spawn(move || {
                    let stats = StorageStats::new();
                    for i in 0..800u32 {
                        let v = [w * 1000 + i, i];
                        t.find_or_put(&v, &stats).unwrap();
                    }
                });
            }
            // Stop the sampler once all 3200 distinct vectors landed.
            while t.committed() < 3200 {
                std::thread::yield_now();
            }
            stop.store(true, Ordering::Relaxed);
            sampler.join().unwrap();
        });
    }

    #[test]
    fn done_publishes_complete_vectors() {
        // A reader that polls a known slot must see the full vector the
        // moment the done bit is visible.
        let t = table(10, 8);
        let v: Vec<u32> = (100..108).collect();
        let slot_probe = {
            // First slot of the vector's probe sequence is where it lands
            // in an empty table.
            let d = hash(&v, 1);
            index_of(d, t.geometry())
        };
        let barrier = Barrier::new(2);
        std::thread::scope(|s| {
            let t = &t;
            let v = &v;
            let barrier = &barrier;
            let reader = s.spawn(move || {
                barrier.wait();
                loop {
                    if let BucketState::Done { .. } = t.bucket_state(slot_probe) {
                        assert!(
                            t.raw().vector_equals(slot_probe, v),
                            "done bit visible before the vector was complete"
                        );
                        return;
                    }
                    std::hint::spin_loop();
                }
            });
            let stats = StorageStats::new();
            barrier.wait();
            t.find_or_put(v, &stats).unwrap();
            reader.join().unwrap();
        });
    }

    #[test]
    fn probe_sequences_are_deterministic() {
        let geom = TableGeometry::new(12).unwrap();
        let v = [42u32, 7];
        let walk = |round: u32| -> Vec<usize> {
            walk_the_line(index_of(hash(&v, round), &geom), &geom).collect()
        };
        for round in 1..=8 {
            assert_eq!(walk(round), walk(round));
        }
    }

    #[test]
    fn memo_occupies_word_below_done_bit() {
        let t = table(10, 1);
        let stats = StorageStats::new();
        t.find_or_put(&[5], &stats).unwrap();
        let slot = (0..t.size())
            .find(|&s| matches!(t.bucket_state(s), BucketState::Done { .. }))
            .unwrap();
        if let BucketState::Done { memo } = t.bucket_state(slot) {
            assert!(memo > 0);
            assert!(memo < (1 << MEMO_BITS));
            assert_eq!(memo, memo_of(hash(&[5u32], 1)));
        }
    }
}
