//! Load balancing: static seeding and synchronous random polling with
//! problem splitting.
//!
//! Splitting conserves states exactly: `|P| == |kept| + |given|` with the
//! halves disjoint. Polling is synchronous in the sense that a victim only
//! answers at its own balancer interaction points (every work budget), so
//! the exploration hot loop is never preempted.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use crossbeam::utils::CachePadded;

use crate::models::Model;
use crate::reachability::{Backend, Coordinator, Frontier, Order, Tally};
use crate::storage::{FindOrPut, StorageError, StorageStats};

/// Load balancing strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Seed frontiers with a limited sequential BFS prefix, then never move
    /// work again.
    Static,
    /// Idle workers poll a uniformly random peer, which answers with half
    /// its frontier or a denial.
    Srp,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Static => "static",
            Strategy::Srp => "srp",
        }
    }
}

/// States the static seeding BFS aims to put in each worker's frontier.
pub const SEED_FACTOR: usize = 4;

/// Per-worker balancing counters, merged into the run report.
#[derive(Debug, Default, Clone)]
pub struct BalanceStats {
    pub polls: u64,
    pub denied: u64,
    pub handoffs_given: u64,
    pub handoffs_received: u64,
    pub states_given: u64,
    pub states_received: u64,
    pub idle_rounds: u64,
}

impl BalanceStats {
    pub fn absorb(&mut self, other: &BalanceStats) {
        self.polls += other.polls;
        self.denied += other.denied;
        self.handoffs_given += other.handoffs_given;
        self.handoffs_received += other.handoffs_received;
        self.states_given += other.states_given;
        self.states_received += other.states_received;
        self.idle_rounds += other.idle_rounds;
    }
}

/// Split a frontier: the given half receives `floor(n/2)` states taken from
/// alternating positions, the kept half retains the rest. Refuses frontiers
/// below two states.
pub fn split(frontier: &mut Frontier) -> Option<Vec<Vec<u32>>> {
    if frontier.len() < 2 {
        return None;
    }
    Some(frontier.split_alternating())
}

/// Sequential BFS until the frontier holds at least `workers * SEED_FACTOR`
/// states or the space is exhausted, then deal the frontier round-robin.
/// Expansions during seeding are counted into `tally` like any other work.
pub fn static_seed<B: Backend>(
    model: &dyn Model,
    backend: &B,
    workers: usize,
    order: Order,
    stats: &StorageStats,
    tally: &mut Tally,
) -> Result<Vec<Frontier>, StorageError> {
    let target = workers * SEED_FACTOR;
    let mut bfs = Frontier::new(Order::Bfs);
    seed_initial(model, backend, stats, tally, &mut bfs)?;
    while bfs.len() < target {
        let Some(state) = bfs.pop() else { break };
        let mut out_degree = 0u64;
        let mut failure = None;
        let mut fresh = Vec::new();
        model.for_each_successor(&state, &mut |succ| {
            if failure.is_some() {
                return;
            }
            out_degree += 1;
            match backend.seed_insert(succ, stats) {
                Ok(FindOrPut::Inserted) => fresh.push(succ.to_vec()),
                Ok(FindOrPut::Found) => {}
                Err(e) => failure = Some(e),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        tally.states += fresh.len() as u64;
        tally.transitions += out_degree;
        if out_degree == 0 {
            tally.record_deadlock(&state);
        }
        for v in fresh {
            bfs.push(v);
        }
    }
    let mut frontiers: Vec<Frontier> = (0..workers).map(|_| Frontier::new(order)).collect();
    let mut next = 0;
    while let Some(state) = bfs.pop() {
        frontiers[next].push(state);
        next = (next + 1) % workers;
    }
    Ok(frontiers)
}

/// Commit the initial state and hand worker 0 a one-state frontier; the
/// starting point for dynamic balancing.
pub fn srp_seed<B: Backend>(
    model: &dyn Model,
    backend: &B,
    workers: usize,
    order: Order,
    stats: &StorageStats,
    tally: &mut Tally,
) -> Result<Vec<Frontier>, StorageError> {
    let mut first = Frontier::new(order);
    seed_initial(model, backend, stats, tally, &mut first)?;
    let mut frontiers = vec![first];
    frontiers.extend((1..workers).map(|_| Frontier::new(order)));
    Ok(frontiers)
}

fn seed_initial<B: Backend>(
    model: &dyn Model,
    backend: &B,
    stats: &StorageStats,
    tally: &mut Tally,
    frontier: &mut Frontier,
) -> Result<(), StorageError> {
    let init = model.initial_state();
    if backend.seed_insert(&init, stats)? == FindOrPut::Inserted {
        tally.states += 1;
        frontier.push(init);
    }
    Ok(())
}

/// Answer to a work poll.
#[derive(Debug)]
pub enum PollReply {
    Handoff(Vec<Vec<u32>>),
    Denied,
}

const NO_REQUEST: usize = usize::MAX;

struct PollSlot {
    /// Requester id parked on this worker, or `NO_REQUEST`.
    request: AtomicUsize,
    /// Reply for THIS worker's own outstanding request, written by the
    /// victim that accepted it. Single producer per transaction.
    reply: Mutex<Option<PollReply>>,
}

/// One request slot and one reply slot per worker.
pub struct PollTable {
    slots: Box<[CachePadded<PollSlot>]>,
}

impl PollTable {
    pub fn new(workers: usize) -> Self {
        let slots = (0..workers)
            .map(|_| {
                CachePadded::new(PollSlot {
                    request: AtomicUsize::new(NO_REQUEST),
                    reply: Mutex::new(None),
                })
            })
            .collect();
        PollTable { slots }
    }

    /// Requester side: park a request on `victim`. Fails if another
    /// requester already holds the slot.
    pub fn request(&self, victim: usize, requester: usize) -> bool {
        self.slots[victim]
            .request
            .compare_exchange(
                NO_REQUEST,
                requester,
                Ordering::AcqRel,
                Ordering::Relaxed,
            )
            .is_ok()
    }

    /// Victim side: the requester currently parked on me, if any.
    pub fn pending(&self, me: usize) -> Option<usize> {
        match self.slots[me].request.load(Ordering::Acquire) {
            NO_REQUEST => None,
            requester => Some(requester),
        }
    }

    /// Victim side: publish the answer into the requester's reply slot and
    /// release my request slot.
    pub fn reply(&self, me: usize, requester: usize, reply: PollReply) {
        *self.slots[requester].reply.lock().unwrap() = Some(reply);
        self.slots[me].request.store(NO_REQUEST, Ordering::Release);
    }

    /// Requester side: collect my answer if the victim published it.
    pub fn take_reply(&self, me: usize) -> Option<PollReply> {
        self.slots[me].reply.lock().unwrap().take()
    }
}

/// Exponential idle backoff, capped at 1 ms between poll attempts.
pub struct IdleBackoff {
    step: u32,
}

impl IdleBackoff {
    pub fn new() -> Self {
        IdleBackoff { step: 0 }
    }

    pub fn reset(&mut self) {
        self.step = 0;
    }

    pub fn snooze(&mut self) {
        if self.step < 4 {
            std::thread::yield_now();
        } else {
            let micros = 1u64 << (self.step - 4).min(10);
            std::thread::sleep(Duration::from_micros(micros.min(1000)));
        }
        self.step = self.step.saturating_add(1);
    }
}

impl Default for IdleBackoff {
    fn default() -> Self {
        Self::new()
    }
}

/// Answer a pending poll on `me`: split if the frontier has at least two
/// states, deny otherwise. Returns the handoff size, if any.
pub fn answer_poll(
    polls: &PollTable,
    me: usize,
    frontier: &mut Frontier,
    coord: &Coordinator,
    bstats: &mut BalanceStats,
) -> Option<u64> {
    let requester = polls.pending(me)?;
    match split(frontier) {
        Some(given) => {
            let n = given.len() as u64;
            bstats.handoffs_given += 1;
            bstats.states_given += n;
            // Raise in-flight before the handoff becomes receivable.
            coord.add_in_flight();
            polls.reply(me, requester, PollReply::Handoff(given));
            Some(n)
        }
        None => {
            polls.reply(me, requester, PollReply::Denied);
            None
        }
    }
}
