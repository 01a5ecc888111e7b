/* C interface to the lockless find-or-put state table. */

#ifndef REACHSTORE_H
#define REACHSTORE_H

/* Generated by cbindgen from reachstore-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// The vector was already present.
#define RS_FOUND 0

// The vector was inserted by this call.
#define RS_INSERTED 1

// Null pointer, length mismatch, or out-of-range argument.
#define RS_ERR_BAD_ARG -1

// No free or matching slot within the probe bound; the table is too small.
#define RS_ERR_TABLE_FULL -2

// Table construction could not allocate.
#define RS_ERR_ALLOC -3

// Opaque table handle.
typedef struct RsTable RsTable;

// Storage counters summed over all worker slots.
typedef struct RsStats {
  uint64_t fop_calls;
  uint64_t inserts;
  uint64_t lock_waits;
  uint64_t cas_failures;
  uint64_t probes_total;
  uint64_t max_probe;
  uint64_t rounds_exhausted;
} RsStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a table with `2^bits` slots for vectors of `vector_len` 32-bit
// words, with `max_workers` instrumentation slots. Returns null on
// failure; if `code` is non-null it receives the status.
//
// # Safety
// `code` must be null or valid for one `int32_t` write.
struct RsTable *rs_table_new(uint32_t bits,
                             uintptr_t vector_len,
                             uint32_t max_workers,
                             int32_t *code);

// Destroy a table created by `rs_table_new`. Null is ignored.
//
// # Safety
// `table` must be null or a pointer returned by `rs_table_new` that has
// not been freed, with no other thread still using it.
void rs_table_free(struct RsTable *table);

// Insert the vector if absent. Returns `RS_INSERTED`, `RS_FOUND`, or a
// negative error. Callable concurrently; `worker` selects the counter
// block and must be below the table's `max_workers`.
//
// # Safety
// `table` must be a live table handle and `vector` valid for `len` reads.
int32_t rs_find_or_put(const struct RsTable *table,
                       uint32_t worker,
                       const uint32_t *vector,
                       uintptr_t len);

// Read-only membership test: 1 if present, 0 if absent, negative on error.
//
// # Safety
// `table` must be a live table handle and `vector` valid for `len` reads.
int32_t rs_contains(const struct RsTable *table, const uint32_t *vector, uintptr_t len);

// Slot count of the table.
//
// # Safety
// `table` must be a live table handle.
uint64_t rs_table_size(const struct RsTable *table);

// Configured vector length.
//
// # Safety
// `table` must be a live table handle.
uint64_t rs_table_vector_len(const struct RsTable *table);

// Committed vector count. Scans the whole bucket array; intended for
// verification, not hot paths.
//
// # Safety
// `table` must be a live table handle.
uint64_t rs_table_committed(const struct RsTable *table);

// Sum the per-worker counters into `out`. Safe to call during operation;
// counters are monotone and the snapshot may be slightly stale.
//
// # Safety
// `table` must be a live table handle, `out` valid for one write.
int32_t rs_stats_snapshot(const struct RsTable *table, struct RsStats *out);

// Library version as a static C string.
const char *rs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REACHSTORE_H */
