//! Run records and their serialization: CSV with a fixed header and
//! deterministic column order, or JSON lines. Floats are written in
//! shortest round-trip form, so a reloaded report reproduces identical
//! speedup and efficiency values. JSON lines additionally retain the raw
//! wall time of every repetition; CSV carries only the fixed columns.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::BenchError;

pub const CSV_HEADER: &str = "experiment,storage,workers,model,fill,throughput,wall_ms,speedup,efficiency,lock_waits,cas_failures,probes_per_op";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub storage: String,
    pub workers: u32,
    pub model: String,
    pub fill: f64,
    /// find-or-put calls per second.
    pub throughput: f64,
    pub wall_ms: f64,
    pub speedup: f64,
    pub efficiency: f64,
    pub lock_waits: u64,
    pub cas_failures: u64,
    pub probes_per_op: f64,
    /// Wall time of every repetition; serialized in jsonl only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub raw_wall_ms: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Jsonl,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "jsonl" => Ok(ReportFormat::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

fn csv_fields(r: &RunRecord) -> [String; 12] {
    [
        r.experiment.clone(),
        r.storage.clone(),
        r.workers.to_string(),
        r.model.clone(),
        r.fill.to_string(),
        r.throughput.to_string(),
        r.wall_ms.to_string(),
        r.speedup.to_string(),
        r.efficiency.to_string(),
        r.lock_waits.to_string(),
        r.cas_failures.to_string(),
        r.probes_per_op.to_string(),
    ]
}

/// Write records with the fixed header (CSV) or one JSON object per line.
pub fn write_report<W: Write>(
    records: &[RunRecord],
    format: ReportFormat,
    out: &mut W,
) -> Result<(), BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().from_writer(out);
            w.write_record(CSV_HEADER.split(','))?;
            for r in records {
                w.write_record(csv_fields(r))?;
            }
            w.flush()?;
        }
        ReportFormat::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Read records back from either format (auto-detected by the first line).
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<RunRecord>, BenchError> {
    let mut lines = input.lines();
    let Some(first) = lines.next().transpose()? else {
        return Ok(Vec::new());
    };
    if first.trim_start().starts_with('{') {
        let mut records = vec![serde_json::from_str(&first)?];
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        return Ok(records);
    }
    let mut text = first;
    text.push('\n');
    for line in lines {
        text.push_str(&line?);
        text.push('\n');
    }
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(BenchError::Malformed(format!(
            "unexpected CSV header: {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| -> Result<&str, BenchError> {
            row.get(i)
                .ok_or_else(|| BenchError::Malformed(format!("row too short: {row:?}")))
        };
        let num = |i: usize| -> Result<f64, BenchError> {
            field(i)?
                .parse()
                .map_err(|e| BenchError::Malformed(format!("column {i}: {e}")))
        };
        let int = |i: usize| -> Result<u64, BenchError> {
            field(i)?
                .parse()
                .map_err(|e| BenchError::Malformed(format!("column {i}: {e}")))
        };
        records.push(RunRecord {
            experiment: field(0)?.to_string(),
            storage: field(1)?.to_string(),
            workers: int(2)? as u32,
            model: field(3)?.to_string(),
            fill: num(4)?,
            throughput: num(5)?,
            wall_ms: num(6)?,
            speedup: num(7)?,
            efficiency: num(8)?,
            lock_waits: int(9)?,
            cas_failures: int(10)?,
            probes_per_op: num(11)?,
            raw_wall_ms: Vec::new(),
        });
    }
    Ok(records)
}
