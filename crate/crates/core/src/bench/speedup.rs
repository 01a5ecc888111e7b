//! Speedup/efficiency grid: explore one model for every (storage, workers)
//! cell, repeat, keep the fastest wall time per cell, and normalize against
//! the 1-worker cell of the same storage: S = T_seq / T_par, E = S / N.

use crate::models::from_spec;
use crate::reachability::{ExploreOptions, Order};
use crate::Strategy;

use super::report::RunRecord;
use super::{explore_record, run_explore, BenchError, StorageKind};

#[derive(Debug, Clone)]
pub struct SpeedupConfig {
    pub model_spec: String,
    pub storages: Vec<StorageKind>,
    pub workers: Vec<usize>,
    pub reps: u32,
    pub table_bits: u32,
    pub order: Order,
    pub strategy: Strategy,
    pub seed: u64,
}

impl Default for SpeedupConfig {
    fn default() -> Self {
        SpeedupConfig {
            model_spec: "phils:12".into(),
            storages: vec![StorageKind::Lockless],
            workers: vec![1, 2, 4],
            reps: 4,
            table_bits: 22,
            order: Order::Bfs,
            strategy: Strategy::Srp,
            seed: 42,
        }
    }
}

/// Run the grid. Failed cells become `speedup-error` records; the other
/// cells continue.
pub fn bench_speedup(cfg: &SpeedupConfig) -> Result<Vec<RunRecord>, BenchError> {
    if cfg.reps < 1 {
        return Err(BenchError::NoReps);
    }
    let model = from_spec(&cfg.model_spec)?;
    let mut records = Vec::new();
    for &storage in &cfg.storages {
        let mut baseline_ms: Option<f64> = None;
        for &workers in &cfg.workers {
            let opts = ExploreOptions {
                workers,
                order: cfg.order,
                strategy: cfg.strategy,
                seed: cfg.seed,
                ..ExploreOptions::default()
            };
            let mut best = None;
            let mut raw_walls = Vec::new();
            let mut failure = None;
            for _ in 0..cfg.reps {
                match run_explore(storage, model.as_ref(), cfg.table_bits, &opts) {
                    Ok(report) => {
                        let ms = report.wall.as_secs_f64() * 1e3;
                        raw_walls.push(ms);
                        if best
                            .as_ref()
                            .is_none_or(|(_, best_ms)| ms < *best_ms)
                        {
                            best = Some((report, ms));
                        }
                    }
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            match (best, failure) {
                (Some((report, ms)), None) => {
                    if workers == 1 {
                        baseline_ms = Some(ms);
                    }
                    let speedup = baseline_ms.map_or(0.0, |base| base / ms);
                    let efficiency = speedup / workers as f64;
                    records.push(explore_record(
                        "speedup",
                        &report,
                        cfg.table_bits,
                        speedup,
                        efficiency,
                        raw_walls,
                    ));
                }
                (_, fail) => {
                    records.push(RunRecord {
                        experiment: format!(
                            "speedup-error:{}",
                            fail.map_or("incomplete".into(), |e| e.to_string())
                        ),
                        storage: storage.label().to_string(),
                        workers: workers as u32,
                        model: model.name(),
                        fill: 0.0,
                        throughput: 0.0,
                        wall_ms: 0.0,
                        speedup: 0.0,
                        efficiency: 0.0,
                        lock_waits: 0,
                        cas_failures: 0,
                        probes_per_op: 0.0,
                        raw_wall_ms: raw_walls,
                    });
                }
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_worker_cell_has_unit_speedup() {
        let cfg = SpeedupConfig {
            model_spec: "hanoi:4".into(),
            storages: vec![StorageKind::Lockless, StorageKind::Partitioned],
            workers: vec![1],
            reps: 2,
            table_bits: 10,
            ..SpeedupConfig::default()
        };
        let records = bench_speedup(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert_eq!(r.speedup, 1.0, "S = 1 by definition at one worker");
            assert_eq!(r.efficiency, 1.0);
            assert_eq!(r.raw_wall_ms.len(), 2);
            assert_eq!(r.model, "hanoi:4");
        }
    }

    #[test]
    fn failed_cells_do_not_stop_the_grid() {
        // 2^4 slots cannot hold hanoi(5); the cell must record the error
        // and the next storage still runs.
        let cfg = SpeedupConfig {
            model_spec: "hanoi:5".into(),
            storages: vec![StorageKind::Lockless, StorageKind::Partitioned],
            workers: vec![1],
            reps: 1,
            table_bits: 4,
            ..SpeedupConfig::default()
        };
        let records = bench_speedup(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records[0].experiment.starts_with("speedup-error"));
        // Partitioned storage has no fixed table, so it succeeds.
        assert_eq!(records[1].experiment, "speedup");
    }
}
