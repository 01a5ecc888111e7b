//! Fill-rate/throughput sweep: pre-fill a fresh table to each target
//! fraction, then measure steady-state find-or-put throughput of a mixed
//! stream with `rw_ratio` reads per insert. Reads look up vectors known to
//! be present (regenerated from the indexed stream); inserts take fresh
//! stream indices from a shared counter. A fresh table per point, since
//! deletes do not exist.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crossbeam::utils::CachePadded;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::storage::{snapshot_stats, StateTable, StorageError, StorageStats};

use super::report::RunRecord;
use super::workload::{prefill, VectorGen};
use super::BenchError;

#[derive(Debug, Clone)]
pub struct FillConfig {
    pub table_bits: u32,
    pub vector_len: usize,
    pub fills: Vec<f64>,
    pub workers: Vec<usize>,
    /// Reads per insert in the measured stream (0 = write-only).
    pub rw_ratio: u32,
    pub reps: u32,
    pub seed: u64,
    /// Measured operations per point; capped so inserts stay within half
    /// the remaining headroom above the fill target.
    pub ops_target: u64,
}

impl Default for FillConfig {
    fn default() -> Self {
        FillConfig {
            table_bits: 22,
            vector_len: 8,
            fills: vec![0.5, 0.9],
            workers: vec![1, 4],
            rw_ratio: 4,
            reps: 4,
            seed: 42,
            ops_target: 1_000_000,
        }
    }
}

/// Outcome of one measured (fill, workers) point.
#[derive(Debug)]
pub struct FillPoint {
    pub wall: Duration,
    pub ops: u64,
    pub stats: StorageStats,
    /// Exclusive stream index: all indices below are present in the table.
    pub present_hi: u64,
    /// Stream indices consumed by measurement inserts.
    pub inserted_hi: u64,
}

/// Pre-fill `table` to `fill` and run the mixed stream once.
pub fn fill_point(
    table: &StateTable,
    gen: &VectorGen,
    fill: f64,
    workers: usize,
    rw_ratio: u32,
    ops_target: u64,
    seed: u64,
) -> Result<FillPoint, StorageError> {
    let size = table.size() as u64;
    let target = (fill * size as f64) as u64;
    let prefill_stats = StorageStats::new();
    let present_hi = prefill(table, gen, target, &prefill_stats)?;

    // Cap measured inserts at half the remaining free slots.
    let headroom = (size - target) / 2;
    let per_op_inserts = u64::from(rw_ratio) + 1;
    let inserts = (ops_target / per_op_inserts).min(headroom).max(1);
    let ops = inserts * per_op_inserts;

    let stats: Vec<CachePadded<StorageStats>> = (0..workers)
        .map(|_| CachePadded::new(StorageStats::new()))
        .collect();
    let fresh = AtomicU64::new(present_hi);
    let failed = std::sync::Mutex::new(None::<StorageError>);

    let started = Instant::now();
    std::thread::scope(|s| {
        for w in 0..workers {
            let stats = &stats[w];
            let fresh = &fresh;
            let failed = &failed;
            let share = ops / workers as u64 + u64::from(w < (ops % workers as u64) as usize);
            s.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (w as u64) << 32);
                let mut v = vec![0u32; gen.vector_len()];
                for k in 0..share {
                    let index = if k % per_op_inserts == 0 {
                        fresh.fetch_add(1, Ordering::Relaxed)
                    } else {
                        rng.gen_range(0..present_hi)
                    };
                    gen.fill(index, &mut v);
                    if let Err(e) = table.find_or_put(&v, stats) {
                        *failed.lock().unwrap() = Some(e);
                        return;
                    }
                }
            });
        }
    });
    let wall = started.elapsed();
    if let Some(e) = failed.into_inner().unwrap() {
        return Err(e);
    }
    Ok(FillPoint {
        wall,
        ops,
        stats: snapshot_stats(stats.iter().map(|c| &**c)),
        present_hi,
        inserted_hi: fresh.into_inner(),
    })
}

/// Run the full sweep; one record per (fill, workers) cell, with the
/// fastest repetition kept and all raw walls retained.
pub fn bench_fill(cfg: &FillConfig) -> Result<Vec<RunRecord>, BenchError> {
    if cfg.reps < 1 {
        return Err(BenchError::NoReps);
    }
    for &f in &cfg.fills {
        if !(f > 0.0 && f < 1.0) {
            return Err(BenchError::FillOutOfRange(f));
        }
    }
    let mut records = Vec::new();
    for &fill in &cfg.fills {
        // Per-worker-count baselines: the 1-worker cell of the same fill.
        let mut baseline_ms: Option<f64> = None;
        for &workers in &cfg.workers {
            let mut best: Option<FillPoint> = None;
            let mut raw_walls = Vec::new();
            let mut full = false;
            for rep in 0..cfg.reps {
                let table = StateTable::new(cfg.table_bits, cfg.vector_len)?;
                let gen = VectorGen::new(cfg.seed, cfg.vector_len);
                match fill_point(
                    &table,
                    &gen,
                    fill,
                    workers,
                    cfg.rw_ratio,
                    cfg.ops_target,
                    cfg.seed ^ u64::from(rep),
                ) {
                    Ok(point) => {
                        raw_walls.push(point.wall.as_secs_f64() * 1e3);
                        if best.as_ref().is_none_or(|b| point.wall < b.wall) {
                            best = Some(point);
                        }
                    }
                    Err(StorageError::TableFull { .. }) => {
                        full = true;
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let record = match (&best, full) {
                (_, true) | (None, _) => RunRecord {
                    experiment: "fill-tablefull".into(),
                    storage: "lockless".into(),
                    workers: workers as u32,
                    model: format!("rand-v{}", cfg.vector_len),
                    fill,
                    throughput: 0.0,
                    wall_ms: 0.0,
                    speedup: 0.0,
                    efficiency: 0.0,
                    lock_waits: 0,
                    cas_failures: 0,
                    probes_per_op: 0.0,
                    raw_wall_ms: raw_walls,
                },
                (Some(point), false) => {
                    let wall_ms = point.wall.as_secs_f64() * 1e3;
                    if workers == 1 {
                        baseline_ms = Some(wall_ms);
                    }
                    let speedup = baseline_ms.map_or(0.0, |base| base / wall_ms);
                    RunRecord {
                        experiment: "fill".into(),
                        storage: "lockless".into(),
                        workers: workers as u32,
                        model: format!("rand-v{}", cfg.vector_len),
                        fill,
                        throughput: point.ops as f64 / point.wall.as_secs_f64(),
                        wall_ms,
                        speedup,
                        efficiency: speedup / workers as f64,
                        lock_waits: point.stats.lock_waits(),
                        cas_failures: point.stats.cas_failures(),
                        probes_per_op: point.stats.probes_total() as f64 / point.ops as f64,
                        raw_wall_ms: raw_walls,
                    }
                }
            };
            records.push(record);
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storage::FindOrPut;

    #[test]
    fn mixed_streams_preserve_exact_membership() {
        // Duplicate-heavy (25 reads per insert) and write-only streams both
        // complete with membership exactly equal to the generated prefix.
        for rw_ratio in [25u32, 0] {
            let table = StateTable::new(12, 2).unwrap();
            let gen = VectorGen::new(5, 2);
            let point = fill_point(&table, &gen, 0.3, 4, rw_ratio, 4000, 7).unwrap();
            assert_eq!(point.ops % u64::from(rw_ratio + 1), 0);
            // Every stream index below the insert high-water mark is
            // present; nothing else was ever generated.
            let stats = StorageStats::new();
            let mut present = 0;
            for i in 0..point.inserted_hi {
                if table.find_or_put(&gen.vector(i), &stats).unwrap() == FindOrPut::Found {
                    present += 1;
                }
            }
            assert_eq!(present, point.inserted_hi, "rw_ratio={rw_ratio}");
            assert_eq!(table.committed() as u64, stats_distinct(&gen, point.inserted_hi));
        }
    }

    fn stats_distinct(gen: &VectorGen, hi: u64) -> u64 {
        let mut set = std::collections::HashSet::new();
        for i in 0..hi {
            set.insert(gen.vector(i));
        }
        set.len() as u64
    }

    #[test]
    fn sweep_emits_one_record_per_cell() {
        let cfg = FillConfig {
            table_bits: 12,
            vector_len: 2,
            fills: vec![0.2, 0.5],
            workers: vec![1, 2],
            rw_ratio: 4,
            reps: 2,
            seed: 11,
            ops_target: 2000,
        };
        let records = bench_fill(&cfg).unwrap();
        assert_eq!(records.len(), 4);
        for r in &records {
            assert_eq!(r.experiment, "fill");
            assert!(r.throughput > 0.0);
            assert_eq!(r.raw_wall_ms.len(), 2);
            assert_eq!(r.efficiency, r.speedup / f64::from(r.workers));
        }
        // Baseline cells carry speedup 1 by construction.
        assert_eq!(records[0].speedup, 1.0);
        assert_eq!(records[0].efficiency, 1.0);
    }

    #[test]
    fn bad_fill_targets_are_rejected() {
        let cfg = FillConfig {
            fills: vec![1.0],
            ..FillConfig::default()
        };
        assert!(matches!(
            bench_fill(&cfg),
            Err(BenchError::FillOutOfRange(_))
        ));
    }
}
