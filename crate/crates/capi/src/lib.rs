//! C ABI over the lockless find-or-put state table.
//!
//! Handles are opaque; every function returns a status code from the
//! `RS_*` constants, with negative values for errors. A table carries one
//! instrumentation block per declared worker slot; concurrent callers must
//! pass distinct worker ids (the table itself is safe for any concurrency,
//! the per-worker counters are single-writer).

use std::ffi::c_char;

use reachstore::storage::{snapshot_stats, FindOrPut, StateTable, StorageError, StorageStats};

/// The vector was already present.
pub const RS_FOUND: i32 = 0;
/// The vector was inserted by this call.
pub const RS_INSERTED: i32 = 1;
/// Null pointer, length mismatch, or out-of-range argument.
pub const RS_ERR_BAD_ARG: i32 = -1;
/// No free or matching slot within the probe bound; the table is too small.
pub const RS_ERR_TABLE_FULL: i32 = -2;
/// Table construction could not allocate.
pub const RS_ERR_ALLOC: i32 = -3;

/// Opaque table handle.
pub struct RsTable {
    table: StateTable,
    stats: Box<[StorageStats]>,
}

/// Storage counters summed over all worker slots.
#[repr(C)]
#[derive(Default, Clone, Copy)]
pub struct RsStats {
    pub fop_calls: u64,
    pub inserts: u64,
    pub lock_waits: u64,
    pub cas_failures: u64,
    pub probes_total: u64,
    pub max_probe: u64,
    pub rounds_exhausted: u64,
}

fn error_code(e: &StorageError) -> i32 {
    match e {
        StorageError::TableFull { .. } => RS_ERR_TABLE_FULL,
        StorageError::Allocation { .. } => RS_ERR_ALLOC,
        _ => RS_ERR_BAD_ARG,
    }
}

/// Create a table with `2^bits` slots for vectors of `vector_len` 32-bit
/// words, with `max_workers` instrumentation slots. Returns null on
/// failure; if `code` is non-null it receives the status.
///
/// # Safety
/// `code` must be null or valid for one `int32_t` write.
#[no_mangle]
pub unsafe extern "C" fn rs_table_new(
    bits: u32,
    vector_len: usize,
    max_workers: u32,
    code: *mut i32,
) -> *mut RsTable {
    let put_code = |c: i32| {
        if !code.is_null() {
            unsafe { *code = c };
        }
    };
    if max_workers == 0 {
        put_code(RS_ERR_BAD_ARG);
        return std::ptr::null_mut();
    }
    match StateTable::new(bits, vector_len) {
        Ok(table) => {
            let stats = (0..max_workers).map(|_| StorageStats::new()).collect();
            put_code(RS_FOUND);
            Box::into_raw(Box::new(RsTable { table, stats }))
        }
        Err(e) => {
            put_code(error_code(&e));
            std::ptr::null_mut()
        }
    }
}

/// Destroy a table created by `rs_table_new`. Null is ignored.
///
/// # Safety
/// `table` must be null or a pointer returned by `rs_table_new` that has
/// not been freed, with no other thread still using it.
#[no_mangle]
pub unsafe extern "C" fn rs_table_free(table: *mut RsTable) {
    if !table.is_null() {
        drop(unsafe { Box::from_raw(table) });
    }
}

/// Insert the vector if absent. Returns `RS_INSERTED`, `RS_FOUND`, or a
/// negative error. Callable concurrently; `worker` selects the counter
/// block and must be below the table's `max_workers`.
///
/// # Safety
/// `table` must be a live table handle and `vector` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn rs_find_or_put(
    table: *const RsTable,
    worker: u32,
    vector: *const u32,
    len: usize,
) -> i32 {
    let Some(t) = (unsafe { table.as_ref() }) else {
        return RS_ERR_BAD_ARG;
    };
    if vector.is_null() || len != t.table.vector_len() || (worker as usize) >= t.stats.len() {
        return RS_ERR_BAD_ARG;
    }
    let v = unsafe { std::slice::from_raw_parts(vector, len) };
    match t.table.find_or_put(v, &t.stats[worker as usize]) {
        Ok(FindOrPut::Inserted) => RS_INSERTED,
        Ok(FindOrPut::Found) => RS_FOUND,
        Err(e) => error_code(&e),
    }
}

/// Read-only membership test: 1 if present, 0 if absent, negative on error.
///
/// # Safety
/// `table` must be a live table handle and `vector` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn rs_contains(
    table: *const RsTable,
    vector: *const u32,
    len: usize,
) -> i32 {
    let Some(t) = (unsafe { table.as_ref() }) else {
        return RS_ERR_BAD_ARG;
    };
    if vector.is_null() || len != t.table.vector_len() {
        return RS_ERR_BAD_ARG;
    }
    let v = unsafe { std::slice::from_raw_parts(vector, len) };
    i32::from(t.table.contains(v))
}

/// Slot count of the table.
///
/// # Safety
/// `table` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn rs_table_size(table: *const RsTable) -> u64 {
    unsafe { table.as_ref() }.map_or(0, |t| t.table.size() as u64)
}

/// Configured vector length.
///
/// # Safety
/// `table` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn rs_table_vector_len(table: *const RsTable) -> u64 {
    unsafe { table.as_ref() }.map_or(0, |t| t.table.vector_len() as u64)
}

/// Committed vector count. Scans the whole bucket array; intended for
/// verification, not hot paths.
///
/// # Safety
/// `table` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn rs_table_committed(table: *const RsTable) -> u64 {
    unsafe { table.as_ref() }.map_or(0, |t| t.table.committed() as u64)
}

/// Sum the per-worker counters into `out`. Safe to call during operation;
/// counters are monotone and the snapshot may be slightly stale.
///
/// # Safety
/// `table` must be a live table handle, `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rs_stats_snapshot(table: *const RsTable, out: *mut RsStats) -> i32 {
    let Some(t) = (unsafe { table.as_ref() }) else {
        return RS_ERR_BAD_ARG;
    };
    if out.is_null() {
        return RS_ERR_BAD_ARG;
    }
    let total = snapshot_stats(t.stats.iter());
    unsafe {
        *out = RsStats {
            fop_calls: total.fop_calls(),
            inserts: total.inserts(),
            lock_waits: total.lock_waits(),
            cas_failures: total.cas_failures(),
            probes_total: total.probes_total(),
            max_probe: total.max_probe(),
            rounds_exhausted: total.rounds_exhausted(),
        };
    }
    RS_FOUND
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
