//! Run-wide coordination: idle accounting, in-flight work tracking, and
//! termination detection.
//!
//! The idle count and the in-flight handoff count share one atomic word
//! (idle in the low half, in-flight in the high half), so the termination
//! predicate "all workers idle and nothing in transit" is a single load.
//! A worker only enters the idle state with an empty frontier and can only
//! gain work again after leaving it, and every handoff or routed vector
//! raises the in-flight half strictly before it becomes receivable, so the
//! predicate can never be observed true while work exists. All operations
//! here are on the starvation path, not the exploration hot path.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;

use crate::storage::StorageError;

const IDLE_ONE: u64 = 1;
const IN_FLIGHT_ONE: u64 = 1 << 32;

pub struct Coordinator {
    packed: AtomicU64,
    workers: u32,
    terminated: AtomicBool,
    failure: Mutex<Option<StorageError>>,
}

impl Coordinator {
    pub fn new(workers: usize) -> Self {
        assert!(workers >= 1 && workers <= u32::MAX as usize);
        Coordinator {
            packed: AtomicU64::new(0),
            workers: workers as u32,
            terminated: AtomicBool::new(false),
            failure: Mutex::new(None),
        }
    }

    pub fn workers(&self) -> usize {
        self.workers as usize
    }

    /// The calling worker's frontier is empty and its inbox was observed
    /// empty; it now only answers polls until it receives work.
    pub fn enter_idle(&self) {
        self.packed.fetch_add(IDLE_ONE, Ordering::SeqCst);
    }

    /// The calling worker found work (handoff or routed vectors). Must be
    /// called before the work is merged into its frontier.
    pub fn leave_idle(&self) {
        self.packed.fetch_sub(IDLE_ONE, Ordering::SeqCst);
    }

    /// A handoff or routed vector is about to become receivable. Must be
    /// raised before the item is published, lowered after the receiver has
    /// fully absorbed it.
    pub fn add_in_flight(&self) {
        self.packed.fetch_add(IN_FLIGHT_ONE, Ordering::SeqCst);
    }

    pub fn remove_in_flight(&self) {
        self.packed.fetch_sub(IN_FLIGHT_ONE, Ordering::SeqCst);
    }

    /// True when every worker is idle, every frontier is therefore empty,
    /// and no handoff is in flight. Never true while work exists; the
    /// double read is a cheap confirmation against a torn decision on the
    /// cold path. Sets the run-wide terminated flag as a side effect.
    pub fn detect_termination(&self) -> bool {
        let quiet = u64::from(self.workers);
        if self.packed.load(Ordering::SeqCst) != quiet {
            return false;
        }
        std::hint::spin_loop();
        if self.packed.load(Ordering::SeqCst) != quiet {
            return false;
        }
        self.terminated.store(true, Ordering::SeqCst);
        true
    }

    pub fn terminated(&self) -> bool {
        self.terminated.load(Ordering::SeqCst)
    }

    /// Record the first fatal storage error and stop the run.
    pub fn fail(&self, err: StorageError) {
        let mut slot = self.failure.lock().unwrap();
        if slot.is_none() {
            *slot = Some(err);
        }
        self.terminated.store(true, Ordering::SeqCst);
    }

    pub fn take_failure(&self) -> Option<StorageError> {
        self.failure.lock().unwrap().take()
    }
}
