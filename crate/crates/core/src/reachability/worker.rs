//! One exploration worker: pops states from its local frontier, expands
//! them through the model, and offers every successor to the shared
//! storage. Between work budgets it answers poll requests; when starved it
//! polls random peers (srp) or waits for termination (static).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::balance::{answer_poll, BalanceStats, IdleBackoff, PollReply, PollTable, Strategy};
use crate::models::Model;
use crate::storage::{StorageError, StorageStats};

use super::backend::{Backend, Offer};
use super::coordinator::Coordinator;
use super::frontier::Frontier;

/// Deadlock states sampled per worker (and reported per run).
pub const MAX_DEADLOCK_SAMPLES: usize = 16;

/// Engine-side counts one worker accumulates.
#[derive(Debug, Default)]
pub struct Tally {
    /// Vectors this worker committed (insert events).
    pub states: u64,
    /// Successor evaluations.
    pub transitions: u64,
    /// Expanded states with zero successors.
    pub deadlocks: u64,
    pub deadlock_samples: Vec<Vec<u32>>,
}

impl Tally {
    pub fn record_deadlock(&mut self, state: &[u32]) {
        self.deadlocks += 1;
        if self.deadlock_samples.len() < MAX_DEADLOCK_SAMPLES {
            self.deadlock_samples.push(state.to_vec());
        }
    }

    pub fn absorb(&mut self, other: Tally) {
        self.states += other.states;
        self.transitions += other.transitions;
        self.deadlocks += other.deadlocks;
        for sample in other.deadlock_samples {
            if self.deadlock_samples.len() < MAX_DEADLOCK_SAMPLES {
                self.deadlock_samples.push(sample);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkOutcome {
    /// The frontier emptied before the budget ran out.
    Exhausted,
    /// The budget ran out with work left.
    BudgetSpent,
}

pub(crate) struct WorkerOutput<S> {
    pub tally: Tally,
    pub bstats: BalanceStats,
    pub ws: S,
}

pub(crate) struct Worker<'a, B: Backend> {
    pub id: usize,
    pub model: &'a dyn Model,
    pub backend: &'a B,
    pub ws: B::WorkerState,
    pub frontier: Frontier,
    pub stats: &'a StorageStats,
    pub coord: &'a Coordinator,
    pub polls: &'a PollTable,
    pub strategy: Strategy,
    pub budget: usize,
    pub rng: ChaCha8Rng,
    pub tally: Tally,
    pub bstats: BalanceStats,
}

impl<'a, B: Backend> Worker<'a, B> {
    pub fn run(mut self) -> WorkerOutput<B::WorkerState> {
        loop {
            if self.coord.terminated() {
                break;
            }
            self.interaction_point();
            if self.frontier.is_empty() {
                if !self.idle_phase() {
                    break;
                }
                continue;
            }
            if let Err(e) = self.work(self.budget) {
                self.coord.fail(e);
                break;
            }
        }
        WorkerOutput {
            tally: self.tally,
            bstats: self.bstats,
            ws: self.ws,
        }
    }

    /// Balancer interaction point: answer at most one parked poll and
    /// harvest any routed vectors.
    fn interaction_point(&mut self) {
        if self.strategy == Strategy::Srp {
            let Worker {
                polls,
                id,
                frontier,
                coord,
                bstats,
                ..
            } = self;
            answer_poll(polls, *id, frontier, coord, bstats);
        }
        if self.backend.has_routed_work(self.id) {
            self.drain_inbox();
        }
    }

    /// Up to `budget` iterations of the exploration loop body: pop a state,
    /// enumerate successors, offer each to storage, push the fresh ones,
    /// count deadlocks.
    pub fn work(&mut self, budget: usize) -> Result<WorkOutcome, StorageError> {
        let model = self.model;
        for _ in 0..budget {
            let Some(state) = self.frontier.pop() else {
                return Ok(WorkOutcome::Exhausted);
            };
            let mut out_degree = 0u64;
            let mut failure: Option<StorageError> = None;
            model.for_each_successor(&state, &mut |succ| {
                if failure.is_some() {
                    return;
                }
                out_degree += 1;
                if let Err(e) = self.place(succ) {
                    failure = Some(e);
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            self.tally.transitions += out_degree;
            if out_degree == 0 {
                self.tally.record_deadlock(&state);
            }
        }
        Ok(WorkOutcome::BudgetSpent)
    }

    /// Offer one successor until it is placed somewhere: committed locally,
    /// recognized as seen, or routed to its owner. Backpressure from a full
    /// owner queue is absorbed by draining our own inbox and retrying.
    fn place(&mut self, succ: &[u32]) -> Result<(), StorageError> {
        loop {
            let offer = {
                let Worker {
                    backend,
                    id,
                    ws,
                    stats,
                    coord,
                    ..
                } = self;
                backend.offer(*id, ws, succ, stats, coord)?
            };
            match offer {
                Offer::Inserted => {
                    self.tally.states += 1;
                    self.frontier.push(succ.to_vec());
                    return Ok(());
                }
                Offer::Found | Offer::Routed => return Ok(()),
                Offer::Busy => {
                    self.drain_inbox();
                    std::thread::yield_now();
                }
            }
        }
    }

    fn drain_inbox(&mut self) {
        let Worker {
            backend,
            id,
            ws,
            stats,
            coord,
            frontier,
            tally,
            ..
        } = self;
        backend.drain(*id, ws, stats, coord, &mut |v| {
            tally.states += 1;
            frontier.push(v);
        });
    }

    /// Starved: only answer polls, harvest routed work, and poll peers
    /// until work arrives (true) or the run terminates (false).
    fn idle_phase(&mut self) -> bool {
        self.coord.enter_idle();
        let mut backoff = IdleBackoff::new();
        loop {
            self.bstats.idle_rounds += 1;
            if self.coord.terminated() {
                return false;
            }
            if self.strategy == Strategy::Srp {
                // Our frontier is empty, so this always denies, but it keeps
                // pollers from waiting a full backoff on us.
                let Worker {
                    polls,
                    id,
                    frontier,
                    coord,
                    bstats,
                    ..
                } = self;
                answer_poll(polls, *id, frontier, coord, bstats);
            }
            if self.backend.has_routed_work(self.id) {
                self.coord.leave_idle();
                self.drain_inbox();
                if !self.frontier.is_empty() {
                    return true;
                }
                // Only duplicates arrived; back to waiting.
                self.coord.enter_idle();
                continue;
            }
            if self.strategy == Strategy::Srp && self.coord.workers() > 1 {
                match self.poll_random() {
                    Some(states) => {
                        self.coord.leave_idle();
                        self.bstats.handoffs_received += 1;
                        self.bstats.states_received += states.len() as u64;
                        self.frontier.extend(states);
                        self.coord.remove_in_flight();
                        return true;
                    }
                    None => {
                        self.bstats.denied += 1;
                    }
                }
            }
            if self.coord.detect_termination() {
                return false;
            }
            backoff.snooze();
        }
    }

    /// One synchronous poll: park a request on a uniformly random peer and
    /// wait for its split-or-deny answer (at most one interaction round,
    /// unless the run terminates first).
    fn poll_random(&mut self) -> Option<Vec<Vec<u32>>> {
        let workers = self.coord.workers();
        let mut victim = self.rng.gen_range(0..workers - 1);
        if victim >= self.id {
            victim += 1;
        }
        self.bstats.polls += 1;
        if !self.polls.request(victim, self.id) {
            // Someone else is already polling that peer.
            return None;
        }
        let mut backoff = IdleBackoff::new();
        loop {
            if let Some(reply) = self.polls.take_reply(self.id) {
                return match reply {
                    PollReply::Handoff(states) => Some(states),
                    PollReply::Denied => None,
                };
            }
            // Termination implies in-flight is zero, so no handoff for us
            // can be pending when this fires.
            if self.coord.terminated() {
                return None;
            }
            // Answer requests parked on us meanwhile; two mutually polling
            // idle workers must both get their denials.
            let Worker {
                polls,
                id,
                frontier,
                coord,
                bstats,
                ..
            } = self;
            answer_poll(polls, *id, frontier, coord, bstats);
            backoff.snooze();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::parse_ets;
    use crate::reachability::Order;
    use crate::storage::StateTable;
    use rand::SeedableRng;

    fn chain(n: u32) -> crate::models::ExplicitTs {
        let mut text = String::from("ets 1\nveclen 1\ninit 0\n");
        for i in 0..n {
            text.push_str(&format!("edge {} -> {}\n", i, i + 1));
        }
        parse_ets(&text, "chain").unwrap()
    }

    fn harness<'a>(
        model: &'a dyn Model,
        table: &'a StateTable,
        stats: &'a StorageStats,
        coord: &'a Coordinator,
        polls: &'a PollTable,
    ) -> Worker<'a, StateTable> {
        Worker {
            id: 0,
            model,
            backend: table,
            ws: (),
            frontier: Frontier::new(Order::Bfs),
            stats,
            coord,
            polls,
            strategy: Strategy::Static,
            budget: 64,
            rng: ChaCha8Rng::seed_from_u64(0),
            tally: Tally::default(),
            bstats: BalanceStats::default(),
        }
    }

    #[test]
    fn work_on_empty_frontier_exhausts_immediately() {
        let model = chain(10);
        let table = StateTable::new(10, 1).unwrap();
        let stats = StorageStats::new();
        let coord = Coordinator::new(1);
        let polls = PollTable::new(1);
        let mut w = harness(&model, &table, &stats, &coord, &polls);
        assert_eq!(w.work(5).unwrap(), WorkOutcome::Exhausted);
        assert_eq!(w.tally.transitions, 0);
    }

    #[test]
    fn deadlock_state_exhausts_after_one_iteration() {
        let model = chain(1); // states 0 -> 1; state 1 deadlocks
        let table = StateTable::new(10, 1).unwrap();
        let stats = StorageStats::new();
        let coord = Coordinator::new(1);
        let polls = PollTable::new(1);
        let mut w = harness(&model, &table, &stats, &coord, &polls);
        table.find_or_put(&[1], &stats).unwrap();
        w.frontier.push(vec![1]);
        assert_eq!(w.work(5).unwrap(), WorkOutcome::Exhausted);
        assert_eq!(w.tally.deadlocks, 1);
        assert_eq!(w.tally.deadlock_samples, vec![vec![1]]);
    }

    #[test]
    fn budget_bounds_iterations_on_a_chain() {
        // Hand-simulated on a 10-chain: three iterations starting from the
        // head commit exactly three new states and leave one frontier entry.
        let model = chain(10);
        let table = StateTable::new(10, 1).unwrap();
        let stats = StorageStats::new();
        let coord = Coordinator::new(1);
        let polls = PollTable::new(1);
        let mut w = harness(&model, &table, &stats, &coord, &polls);
        table.find_or_put(&[0], &stats).unwrap();
        w.frontier.push(vec![0]);
        assert_eq!(w.work(3).unwrap(), WorkOutcome::BudgetSpent);
        assert_eq!(w.frontier.len(), 1);
        assert_eq!(w.tally.states, 3);
        assert_eq!(w.tally.transitions, 3);
    }
}
