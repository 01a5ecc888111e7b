//! Benchmark harness: fill-rate/throughput sweeps, speedup/efficiency
//! tables, the analytic probe-bound evaluator, and a small-scope exhaustive
//! checker for the bucket protocol. The orchestrator is single-threaded;
//! measured sections are internally parallel and exclude table
//! construction and teardown.

mod bounds;
mod fill;
mod protocol;
mod report;
mod speedup;
mod workload;

pub use bounds::{measure_unsuccessful_probes, probe_bounds, ProbeBounds};
pub use fill::{bench_fill, fill_point, FillConfig, FillPoint};
pub use protocol::{
    check_bucket_protocol, check_protocol_all, ProtocolReport, Scenario, Variant, Violation,
    ViolationKind,
};
pub use report::{read_records, write_report, ReportFormat, RunRecord, CSV_HEADER};
pub use speedup::{bench_speedup, SpeedupConfig};
pub use workload::{prefill, VectorGen};

use thiserror::Error;

use crate::models::{Model, ModelError};
use crate::reachability::{explore, ExploreError, ExploreOptions, ExploreReport};
use crate::storage::{PartitionedStore, RegionLockedTable, StateTable, StorageError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("alpha must be inside (0,1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("fill targets must be inside (0,1), got {0}")]
    FillOutOfRange(f64),
    #[error("repetitions must be at least 1")]
    NoReps,
    #[error("a report needs at least one record")]
    NoRecords,
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Storage architecture selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageKind {
    Lockless,
    Region,
    Partitioned,
}

impl StorageKind {
    pub fn label(&self) -> &'static str {
        match self {
            StorageKind::Lockless => "lockless",
            StorageKind::Region => "region",
            StorageKind::Partitioned => "partitioned",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "lockless" => Ok(StorageKind::Lockless),
            "region" => Ok(StorageKind::Region),
            "partitioned" => Ok(StorageKind::Partitioned),
            other => Err(format!(
                "unknown storage `{other}` (expected lockless, region, or partitioned)"
            )),
        }
    }
}

/// Build the selected storage fresh and explore the model with it. The
/// store is constructed before the measured section inside `explore`.
pub fn run_explore(
    kind: StorageKind,
    model: &dyn Model,
    table_bits: u32,
    opts: &ExploreOptions,
) -> Result<ExploreReport, BenchError> {
    let len = model.vector_len();
    let report = match kind {
        StorageKind::Lockless => {
            let table = StateTable::new(table_bits, len)?;
            explore(model, &table, opts)?
        }
        StorageKind::Region => {
            let table = RegionLockedTable::new(table_bits, len)?;
            explore(model, &table, opts)?
        }
        StorageKind::Partitioned => {
            let store = PartitionedStore::new(opts.workers, len);
            explore(model, &store, opts)?
        }
    };
    Ok(report)
}

/// One CSV/JSONL row from an exploration report.
pub fn explore_record(
    experiment: &str,
    report: &ExploreReport,
    table_bits: u32,
    speedup: f64,
    efficiency: f64,
    raw_wall_ms: Vec<f64>,
) -> RunRecord {
    let wall_ms = report.wall.as_secs_f64() * 1e3;
    let fops = report.totals.fop_calls();
    let fill = if report.storage == "partitioned" {
        0.0
    } else {
        report.states as f64 / (1u64 << table_bits) as f64
    };
    RunRecord {
        experiment: experiment.to_string(),
        storage: report.storage.to_string(),
        workers: report.workers as u32,
        model: report.model.clone(),
        fill,
        throughput: if wall_ms > 0.0 {
            fops as f64 / (wall_ms / 1e3)
        } else {
            0.0
        },
        wall_ms,
        speedup,
        efficiency,
        lock_waits: report.totals.lock_waits(),
        cas_failures: report.totals.cas_failures(),
        probes_per_op: if fops > 0 {
            report.totals.probes_total() as f64 / fops as f64
        } else {
            0.0
        },
        raw_wall_ms,
    }
}
