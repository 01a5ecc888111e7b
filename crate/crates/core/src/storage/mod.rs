//! State storages: the lockless shared table plus the two comparison
//! architectures (region-locked shared table and static partitioning).
//!
//! All storages expose the same single operation, find-or-put, with set
//! semantics over fixed-length `u32` state vectors. None of them support
//! delete or resize; capacity is fixed at construction.

pub mod lockless;
pub mod partitioned;
pub mod region;
mod stats;

pub use lockless::{StateTable, DEFAULT_MAX_ROUNDS};
pub use partitioned::{owner_of, PartitionedStore, QueueFull, DEFAULT_QUEUE_CAPACITY};
pub use region::{RegionLockedTable, DEFAULT_REGION_COUNT};
pub use stats::{snapshot_stats, StorageStats};

use std::ops::Range;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use thiserror::Error;

use crate::hashing::{GeometryError, TableGeometry, MEMO_BITS};

/// Outcome of a find-or-put call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindOrPut {
    /// The vector was not present; this caller committed it.
    Inserted,
    /// An equal vector was already committed (or being committed).
    Found,
}

#[derive(Debug, Error)]
pub enum StorageError {
    /// No free or matching slot after the bounded number of double-hash
    /// rounds. The table was sized too small for the workload.
    #[error("table full after {rounds} double-hash rounds; size the table above the state space")]
    TableFull { rounds: u32 },
    #[error("cannot allocate {bytes} bytes for the table")]
    Allocation { bytes: usize },
    #[error("vector length must be at least 1")]
    InvalidVectorLen,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Status bit of a bucket word; the low [`MEMO_BITS`] bits hold the memo.
pub(crate) const DONE_BIT: u64 = 1 << MEMO_BITS;
/// A free bucket is the all-zero word. `memo_of` never returns 0, so any
/// occupied word is nonzero.
pub(crate) const EMPTY_WORD: u64 = 0;

#[inline]
pub(crate) fn write_word(memo: u64) -> u64 {
    memo
}

#[inline]
pub(crate) fn done_word(memo: u64) -> u64 {
    memo | DONE_BIT
}

#[inline]
pub(crate) fn word_memo(word: u64) -> u64 {
    word & !DONE_BIT
}

#[inline]
pub(crate) fn word_is_done(word: u64) -> bool {
    word & DONE_BIT != 0
}

/// Decoded view of one bucket word.
///
/// Legal transitions are `Empty -> Write{m} -> Done{m}` only: the memo never
/// changes after the claim and a bucket never becomes empty again, so every
/// vector's probe sequence stays deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketState {
    Empty,
    Write { memo: u64 },
    Done { memo: u64 },
}

impl BucketState {
    #[inline]
    pub fn decode(word: u64) -> Self {
        if word == EMPTY_WORD {
            BucketState::Empty
        } else if word_is_done(word) {
            BucketState::Done {
                memo: word_memo(word),
            }
        } else {
            BucketState::Write {
                memo: word_memo(word),
            }
        }
    }
}

/// The slot indices of the cache line containing `index`, starting at
/// `index` and wrapping at the line boundary.
pub fn walk_the_line(index: usize, geom: &TableGeometry) -> WalkTheLine {
    let line_slots = geom.line_slots();
    let start = index - index % line_slots;
    WalkTheLine {
        start,
        offset: index - start,
        line_slots,
        emitted: 0,
    }
}

#[derive(Debug, Clone)]
pub struct WalkTheLine {
    start: usize,
    offset: usize,
    line_slots: usize,
    emitted: usize,
}

impl Iterator for WalkTheLine {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.emitted == self.line_slots {
            return None;
        }
        let slot = self.start + (self.offset + self.emitted) % self.line_slots;
        self.emitted += 1;
        Some(slot)
    }
}

/// Bucket array plus the separated pre-allocated data array. Shared by the
/// lockless and region-locked tables; allocated once, never resized.
pub(crate) struct RawTable {
    geom: TableGeometry,
    vector_len: usize,
    buckets: Box<[AtomicU64]>,
    data: Box<[AtomicU32]>,
}

fn alloc_zeroed<T: Default>(len: usize, elem_bytes: usize) -> Result<Box<[T]>, StorageError> {
    let mut v: Vec<T> = Vec::new();
    v.try_reserve_exact(len).map_err(|_| StorageError::Allocation {
        bytes: len * elem_bytes,
    })?;
    v.resize_with(len, T::default);
    Ok(v.into_boxed_slice())
}

impl RawTable {
    pub(crate) fn new(geom: TableGeometry, vector_len: usize) -> Result<Self, StorageError> {
        if vector_len == 0 {
            return Err(StorageError::InvalidVectorLen);
        }
        let size = geom.size();
        let buckets = alloc_zeroed::<AtomicU64>(size, 8)?;
        let data = alloc_zeroed::<AtomicU32>(size * vector_len, 4)?;
        Ok(RawTable {
            geom,
            vector_len,
            buckets,
            data,
        })
    }

    #[inline]
    pub(crate) fn geom(&self) -> &TableGeometry {
        &self.geom
    }

    #[inline]
    pub(crate) fn vector_len(&self) -> usize {
        self.vector_len
    }

    #[inline]
    pub(crate) fn bucket(&self, slot: usize) -> &AtomicU64 {
        &self.buckets[slot]
    }

    #[inline]
    fn data_range(&self, slot: usize) -> Range<usize> {
        let base = slot * self.vector_len;
        base..base + self.vector_len
    }

    /// Store the vector into the slot's data cells. The cells are plain
    /// relaxed atomics; publication order comes from the Release store of
    /// the done word that must follow this call.
    #[inline]
    pub(crate) fn write_vector(&self, slot: usize, vector: &[u32]) {
        for (cell, &value) in self.data[self.data_range(slot)].iter().zip(vector) {
            cell.store(value, Ordering::Relaxed);
        }
    }

    /// Element-wise comparison against the slot's data. Only meaningful
    /// after the caller observed the slot's done bit with Acquire.
    #[inline]
    pub(crate) fn vector_equals(&self, slot: usize, vector: &[u32]) -> bool {
        self.data[self.data_range(slot)]
            .iter()
            .zip(vector)
            .all(|(cell, &value)| cell.load(Ordering::Relaxed) == value)
    }

    pub(crate) fn read_vector(&self, slot: usize) -> Vec<u32> {
        self.data[self.data_range(slot)]
            .iter()
            .map(|cell| cell.load(Ordering::Relaxed))
            .collect()
    }

    pub(crate) fn size(&self) -> usize {
        self.geom.size()
    }
}
