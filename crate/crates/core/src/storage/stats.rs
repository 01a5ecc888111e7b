//! Per-worker storage instrumentation.
//!
//! Each worker owns one `StorageStats` block; the blocks are cache-line
//! aligned so hot counters never share a line between workers. A shared hot
//! counter would reintroduce the coherence traffic the table design avoids.
//! Counters are single-writer: only the owning worker increments, any thread
//! may read a (possibly slightly stale) snapshot.

use std::sync::atomic::{AtomicU64, Ordering};

/// Monotone event counter with one writer and any number of readers.
/// The plain load+store pair avoids the locked RMW a `fetch_add` would emit.
#[derive(Debug, Default)]
pub struct Counter(AtomicU64);

impl Counter {
    #[inline]
    pub fn add(&self, n: u64) {
        let cur = self.0.load(Ordering::Relaxed);
        self.0.store(cur.wrapping_add(n), Ordering::Relaxed);
    }

    #[inline]
    pub fn bump(&self) {
        self.add(1);
    }

    #[inline]
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    #[inline]
    fn raise_to(&self, v: u64) {
        if v > self.0.load(Ordering::Relaxed) {
            self.0.store(v, Ordering::Relaxed);
        }
    }
}

/// Event counters for one worker's storage traffic.
#[derive(Debug, Default)]
#[repr(align(64))]
pub struct StorageStats {
    fop_calls: Counter,
    inserts: Counter,
    lock_waits: Counter,
    cas_failures: Counter,
    probes_total: Counter,
    max_probe: Counter,
    rounds_exhausted: Counter,
}

impl StorageStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fop_calls(&self) -> u64 {
        self.fop_calls.get()
    }

    pub fn inserts(&self) -> u64 {
        self.inserts.get()
    }

    /// Times a probe entered the wait on a bucket in the write state.
    pub fn lock_waits(&self) -> u64 {
        self.lock_waits.get()
    }

    pub fn cas_failures(&self) -> u64 {
        self.cas_failures.get()
    }

    pub fn probes_total(&self) -> u64 {
        self.probes_total.get()
    }

    /// Largest number of slots examined by a single call.
    pub fn max_probe(&self) -> u64 {
        self.max_probe.get()
    }

    pub fn rounds_exhausted(&self) -> u64 {
        self.rounds_exhausted.get()
    }

    #[inline]
    pub(crate) fn on_call(&self) {
        self.fop_calls.bump();
    }

    #[inline]
    pub(crate) fn on_insert(&self) {
        self.inserts.bump();
    }

    #[inline]
    pub(crate) fn on_lock_wait(&self) {
        self.lock_waits.bump();
    }

    #[inline]
    pub(crate) fn on_cas_failure(&self) {
        self.cas_failures.bump();
    }

    #[inline]
    pub(crate) fn on_rounds_exhausted(&self) {
        self.rounds_exhausted.bump();
    }

    /// Account the probes of one finished call.
    #[inline]
    pub(crate) fn close_probe_run(&self, probes: u64) {
        self.probes_total.add(probes);
        self.max_probe.raise_to(probes);
    }

    /// Fold another block into this one (sums; max for `max_probe`).
    pub fn absorb(&self, other: &StorageStats) {
        self.fop_calls.add(other.fop_calls());
        self.inserts.add(other.inserts());
        self.lock_waits.add(other.lock_waits());
        self.cas_failures.add(other.cas_failures());
        self.probes_total.add(other.probes_total());
        self.max_probe.raise_to(other.max_probe());
        self.rounds_exhausted.add(other.rounds_exhausted());
    }
}

/// Sum per-worker counter blocks into one totals block. Counters are
/// monotone, so a snapshot taken during a run is merely slightly stale.
pub fn snapshot_stats<'a, I>(parts: I) -> StorageStats
where
    I: IntoIterator<Item = &'a StorageStats>,
{
    let total = StorageStats::new();
    for part in parts {
        total.absorb(part);
    }
    total
}
