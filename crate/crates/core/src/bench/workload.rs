//! Synthetic storage workloads: a deterministic indexed vector stream so a
//! random read can regenerate any earlier vector instead of keeping the
//! whole pool in memory.

use crate::storage::{FindOrPut, StateTable, StorageError, StorageStats};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `vector(i)` is a pure function of `(seed, i)`.
#[derive(Debug, Clone, Copy)]
pub struct VectorGen {
    seed: u64,
    vector_len: usize,
}

impl VectorGen {
    pub fn new(seed: u64, vector_len: usize) -> Self {
        assert!(vector_len >= 1);
        VectorGen { seed, vector_len }
    }

    pub fn vector_len(&self) -> usize {
        self.vector_len
    }

    #[inline]
    pub fn fill(&self, index: u64, out: &mut [u32]) {
        debug_assert_eq!(out.len(), self.vector_len);
        let mut state = self.seed ^ splitmix(index.wrapping_mul(GOLDEN));
        for w in out.iter_mut() {
            state = state.wrapping_add(GOLDEN);
            *w = (splitmix(state) >> 32) as u32;
        }
    }

    pub fn vector(&self, index: u64) -> Vec<u32> {
        let mut v = vec![0u32; self.vector_len];
        self.fill(index, &mut v);
        v
    }
}

/// Insert stream vectors until exactly `target` distinct ones are
/// committed. Returns the exclusive stream index consumed; every index
/// below it is present in the table afterwards.
pub fn prefill(
    table: &StateTable,
    gen: &VectorGen,
    target: u64,
    stats: &StorageStats,
) -> Result<u64, StorageError> {
    let mut v = vec![0u32; gen.vector_len()];
    let mut index = 0u64;
    let mut inserted = 0u64;
    while inserted < target {
        gen.fill(index, &mut v);
        if table.find_or_put(&v, stats)? == FindOrPut::Inserted {
            inserted += 1;
        }
        index += 1;
    }
    Ok(index)
}
