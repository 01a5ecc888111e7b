//! Concurrent, allocation-free, lockless find-or-put state storage embedded
//! in a multi-worker explicit-state reachability engine, with the two
//! classic competing storage architectures (region locking and static
//! partitioning) for comparison and a benchmark harness for fill-rate,
//! lock-wait, and speedup experiments.
//!
//! The storage needs only one operation, find-or-put: insert a state vector
//! if absent, report presence otherwise, with no side effects when present.
//! That single loose requirement allows a streamlined design: open
//! addressing with linear probing along one cache line followed by double
//! hashing, hash memoization in a tri-state atomic bucket word, a separated
//! pre-allocated data array, and compare-and-swap as the only claiming
//! primitive.

pub mod balance;
pub mod bench;
pub mod hashing;
pub mod models;
pub mod reachability;
pub mod storage;

pub use balance::Strategy;
pub use models::Model;
pub use reachability::{explore, ExploreOptions, ExploreReport, Order};
pub use storage::{FindOrPut, PartitionedStore, RegionLockedTable, StateTable, StorageStats};
