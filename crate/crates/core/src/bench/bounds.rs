//! Analytic probe-count bounds for open addressing, plus the matching
//! empirical measurement in double-hashing-only mode.
//!
//! At fill fraction `a`, expected probes are bounded by
//! `(1/a) ln(1/(1-a)) + 1/a` for successful lookups and `1/(1-a)` for
//! unsuccessful ones.

use crate::hashing::TableGeometry;
use crate::storage::{StateTable, StorageStats, DEFAULT_MAX_ROUNDS};

use super::workload::{prefill, VectorGen};
use super::BenchError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeBounds {
    pub alpha: f64,
    pub successful: f64,
    pub unsuccessful: f64,
}

/// Recover the short decimal the caller wrote (0.9 -> 9/10) by continued
/// fractions, so the closed forms evaluate exactly where they can. A bare
/// float carries representation error that would turn 1/(1-0.9) into
/// 10.000000000000002.
fn small_rational(x: f64) -> Option<(u64, u64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, 0u64, 1u64);
    let mut frac = x;
    for _ in 0..32 {
        let a = frac.floor();
        if !(0.0..=1e6).contains(&a) {
            return None;
        }
        let a_int = a as u64;
        let p2 = a_int.checked_mul(p0)?.checked_add(p1)?;
        let q2 = a_int.checked_mul(q0)?.checked_add(q1)?;
        if q2 > 1_000_000 {
            return None;
        }
        (p1, q1, p0, q0) = (p0, q0, p2, q2);
        let approx = p0 as f64 / q0 as f64;
        if (approx - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some((p0, q0));
        }
        let rem = frac - a;
        if rem <= f64::EPSILON {
            return None;
        }
        frac = 1.0 / rem;
    }
    None
}

/// Evaluate both closed forms at fill fraction `alpha` in (0, 1).
pub fn probe_bounds(alpha: f64) -> Result<ProbeBounds, BenchError> {
    if !(alpha > 0.0 && alpha < 1.0) || !alpha.is_finite() {
        return Err(BenchError::AlphaOutOfRange(alpha));
    }
    let (successful, unsuccessful) = match small_rational(alpha) {
        Some((p, q)) => {
            let inv_alpha = q as f64 / p as f64;
            let unsuccessful = q as f64 / (q - p) as f64;
            (inv_alpha * unsuccessful.ln() + inv_alpha, unsuccessful)
        }
        None => {
            let inv_alpha = 1.0 / alpha;
            let unsuccessful = 1.0 / (1.0 - alpha);
            (inv_alpha * unsuccessful.ln() + inv_alpha, unsuccessful)
        }
    };
    Ok(ProbeBounds {
        alpha,
        successful,
        unsuccessful,
    })
}

/// Average probes per unsuccessful lookup measured on a table filled to
/// `alpha`, with walking-the-line disabled (one-slot lines, so every round
/// is one double-hash probe).
pub fn measure_unsuccessful_probes(
    bits: u32,
    vector_len: usize,
    alpha: f64,
    lookups: u64,
    seed: u64,
) -> Result<f64, BenchError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(BenchError::AlphaOutOfRange(alpha));
    }
    let geom = TableGeometry::with_line_slots(bits, 1).map_err(crate::storage::StorageError::from)?;
    let table = StateTable::with_geometry(geom, vector_len, DEFAULT_MAX_ROUNDS)?;
    let fill_stats = StorageStats::new();
    let target = (alpha * table.size() as f64) as u64;
    let gen = VectorGen::new(seed, vector_len);
    prefill(&table, &gen, target, &fill_stats)?;

    // Vectors from a disjoint stream; with 32*vector_len-bit states the
    // chance of colliding with an inserted vector is negligible, so every
    // lookup is unsuccessful.
    let absent = VectorGen::new(seed ^ 0xD15A_B1ED_0000_0001, vector_len);
    let stats = StorageStats::new();
    let mut v = vec![0u32; vector_len];
    for i in 0..lookups {
        absent.fill(i, &mut v);
        table.contains_counted(&v, &stats);
    }
    Ok(stats.probes_total() as f64 / lookups as f64)
}
