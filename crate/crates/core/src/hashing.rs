//! Hash family for double hashing, table geometry, and memo extraction.
//!
//! The table indexes with the low bits of a 64-bit digest and memoizes the
//! high bits in the bucket word, so the two never overlap for tables up to
//! [`MAX_TABLE_BITS`] bits. Each probing round re-hashes the full vector with
//! a distinct seed derived from the round number.

use thiserror::Error;

/// Cache line size the probing sequence is tuned for, in bytes.
pub const CACHE_LINE_BYTES: usize = 64;

/// Width of one bucket word, in bytes.
pub const BUCKET_WORD_BYTES: usize = 8;

/// Bucket slots that share one cache line: 64 / 8 = 8.
pub const DEFAULT_LINE_SLOTS: usize = CACHE_LINE_BYTES / BUCKET_WORD_BYTES;

/// Bits of the digest memoized in a bucket word. The remaining bit of the
/// 64-bit word is the done/write status bit.
pub const MEMO_BITS: u32 = 63;

/// Smallest supported table, 2^4 slots.
pub const MIN_TABLE_BITS: u32 = 4;

/// Largest supported table, 2^34 slots.
pub const MAX_TABLE_BITS: u32 = 34;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("table bits must be in {MIN_TABLE_BITS}..={MAX_TABLE_BITS}, got {bits}")]
    BitsOutOfRange { bits: u32 },
    #[error("line_slots must be a power of two dividing the table size, got {got}")]
    InvalidLineSlots { got: usize },
}

/// Power-of-two table shape: size, index mask, and slots per cache line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableGeometry {
    bits: u32,
    mask: u64,
    line_slots: usize,
}

impl TableGeometry {
    /// Geometry with the default cache-line-sized probe window.
    pub fn new(bits: u32) -> Result<Self, GeometryError> {
        Self::with_line_slots(bits, DEFAULT_LINE_SLOTS)
    }

    /// Geometry with an explicit probe window. `line_slots = 1` degenerates
    /// to pure double hashing (one probe per round).
    pub fn with_line_slots(bits: u32, line_slots: usize) -> Result<Self, GeometryError> {
        if !(MIN_TABLE_BITS..=MAX_TABLE_BITS).contains(&bits) {
            return Err(GeometryError::BitsOutOfRange { bits });
        }
        let size = 1usize << bits;
        // A power of two <= size always divides size, so every walk stays
        // within one line.
        if !line_slots.is_power_of_two() || line_slots > size {
            return Err(GeometryError::InvalidLineSlots { got: line_slots });
        }
        Ok(TableGeometry {
            bits,
            mask: (size as u64) - 1,
            line_slots,
        })
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn size(&self) -> usize {
        1usize << self.bits
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        self.mask
    }

    #[inline]
    pub fn line_slots(&self) -> usize {
        self.line_slots
    }
}

/// A 64-bit digest of a state vector for probing round `round` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashDigest {
    pub value: u64,
    pub round: u32,
}

const MIX: u64 = 0xc6a4_a793_5bd1_e995;

/// splitmix64 finalizer; distinct rounds get well-separated seeds.
#[inline]
fn round_seed(round: u32) -> u64 {
    let mut z = (round as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Digest of a full state vector under the round's seed. Pure function of
/// `(vector, round)`.
pub fn hash(vector: &[u32], round: u32) -> HashDigest {
    debug_assert!(round >= 1);
    let mut h = round_seed(round) ^ (vector.len() as u64).wrapping_mul(MIX);
    for &word in vector {
        let mut k = u64::from(word);
        k = k.wrapping_mul(MIX);
        k ^= k >> 47;
        k = k.wrapping_mul(MIX);
        h ^= k;
        h = h.wrapping_mul(MIX);
    }
    h ^= h >> 47;
    h = h.wrapping_mul(MIX);
    h ^= h >> 47;
    HashDigest {
        value: h,
        round,
    }
}

/// Slot index: the n least-significant bits of the digest.
#[inline]
pub fn index_of(digest: HashDigest, geom: &TableGeometry) -> usize {
    (digest.value & geom.mask) as usize
}

/// Memoized hash for the bucket word: the high [`MEMO_BITS`] bits of the
/// round-1 digest. Zero is remapped to 1 so an occupied bucket word can
/// never equal the empty (all-zero) encoding.
#[inline]
pub fn memo_of(digest: HashDigest) -> u64 {
    let memo = digest.value >> (64 - MEMO_BITS);
    if memo == 0 {
        1
    } else {
        memo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vectors(n: usize, len: usize, seed: u64) -> Vec<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..len).map(|_| rng.gen()).collect())
            .collect()
    }

    #[test]
    fn hash_is_deterministic() {
        for v in random_vectors(100, 5, 1) {
            assert_eq!(hash(&v, 1), hash(&v, 1));
            assert_eq!(hash(&v, 7), hash(&v, 7));
        }
    }

    #[test]
    fn rounds_use_distinct_seeds() {
        // Measured collision rate between round-1 and round-2 digests over
        // random vectors; requires >= 99.9% distinct.
        let vectors = random_vectors(100_000, 3, 2);
        let collisions = vectors
            .iter()
            .filter(|v| hash(v, 1).value == hash(v, 2).value)
            .count();
        assert!(
            (collisions as f64) < 0.001 * vectors.len() as f64,
            "round-1/round-2 digests collided {collisions} times"
        );
    }

    #[test]
    fn index_distribution_is_uniform() {
        // Brute-force histogram over 2^10 buckets: 10^6 draws, expected
        // 976.5 per bucket, tolerance +-300.
        let geom = TableGeometry::new(10).unwrap();
        let mut counts = vec![0u32; geom.size()];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut v = vec![0u32; 3];
        for _ in 0..1_000_000 {
            for w in v.iter_mut() {
                *w = rng.gen();
            }
            counts[index_of(hash(&v, 1), &geom)] += 1;
        }
        for (idx, &c) in counts.iter().enumerate() {
            assert!(
                (676..=1276).contains(&c),
                "bucket {idx} got {c} entries, outside 976 +- 300"
            );
        }
    }

    #[test]
    fn index_examples() {
        let g20 = TableGeometry::new(20).unwrap();
        let g10 = TableGeometry::new(10).unwrap();
        let d = |value| HashDigest { value, round: 1 };
        assert_eq!(index_of(d(0), &g20), 0);
        assert_eq!(index_of(d((1 << 20) + 5), &g20), 5);
        assert_eq!(index_of(d(0xFFFF_FFFF), &g10), 1023);
    }

    #[test]
    fn memo_remaps_zero_and_passes_high_bits() {
        let d = |value| HashDigest { value, round: 1 };
        // High 63 bits all zero -> remapped to 1.
        assert_eq!(memo_of(d(0)), 1);
        assert_eq!(memo_of(d(1)), 1);
        // High bits pass through: value = 0xABCD << 1 puts 0xABCD in the
        // memo field.
        assert_eq!(memo_of(d(0xABCD << 1)), 0xABCD);
    }

    #[test]
    fn memo_slot_collisions_are_birthday_rare() {
        // Sampling oracle: pairs of distinct vectors that land on the same
        // slot with an equal memo are full-digest-level collisions. With
        // 10^6 samples the expected count is ~0; allow a slack of 2.
        let geom = TableGeometry::new(10).unwrap();
        let vectors = random_vectors(1_000_000, 3, 4);
        let mut seen = std::collections::HashMap::new();
        let mut collisions = 0u32;
        for v in &vectors {
            let d = hash(v, 1);
            let key = (index_of(d, &geom), memo_of(d));
            if let Some(prev) = seen.insert(key, v.clone()) {
                if prev != *v {
                    collisions += 1;
                }
            }
        }
        assert!(collisions <= 2, "{collisions} (slot, memo) collisions");
    }

    #[test]
    fn geometry_rejects_bad_shapes() {
        assert_eq!(
            TableGeometry::new(3).unwrap_err(),
            GeometryError::BitsOutOfRange { bits: 3 }
        );
        assert_eq!(
            TableGeometry::new(35).unwrap_err(),
            GeometryError::BitsOutOfRange { bits: 35 }
        );
        assert_eq!(
            TableGeometry::with_line_slots(10, 3).unwrap_err(),
            GeometryError::InvalidLineSlots { got: 3 }
        );
        assert_eq!(
            TableGeometry::with_line_slots(4, 32).unwrap_err(),
            GeometryError::InvalidLineSlots { got: 32 }
        );
        let g = TableGeometry::with_line_slots(4, 16).unwrap();
        assert_eq!(g.size(), 16);
        assert_eq!(g.line_slots(), 16);
    }

    proptest! {
        #[test]
        fn index_always_in_range(value: u64, bits in 4u32..=20) {
            let geom = TableGeometry::new(bits).unwrap();
            let digest = HashDigest { value, round: 1 };
            prop_assert!(index_of(digest, &geom) < geom.size());
        }

        #[test]
        fn memo_never_empty_encoding(value: u64) {
            let digest = HashDigest { value, round: 1 };
            let m = memo_of(digest);
            prop_assert!(m != 0);
            prop_assert!(m < (1u64 << MEMO_BITS));
        }

        #[test]
        fn hash_depends_only_on_bytes_and_round(v in proptest::collection::vec(any::<u32>(), 1..8), round in 1u32..16) {
            let w = v.clone();
            prop_assert_eq!(hash(&v, round), hash(&w, round));
        }
    }
}
