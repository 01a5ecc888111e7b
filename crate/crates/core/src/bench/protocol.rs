//! Small-scope exhaustive checker for the bucket claiming protocol.
//!
//! Two abstract threads run find-or-put over a two-slot table; every
//! interleaving of their atomic steps (word read, CAS, data write, done
//! store, data read) is enumerated. Checked at every state and at every
//! terminal state:
//!
//! * each distinct vector is inserted exactly once, into exactly one slot;
//! * no reader ever observes a done word whose data cells are incomplete;
//! * the only cycles are the bounded wait on a write-state bucket, so the
//!   protocol cannot get stuck outside that wait.
//!
//! Two seeded mutations reproduce the orderings the protocol must exclude:
//! writing the data after the done store, and claiming without a write bit
//! (done published at claim time). Both must be caught.

use std::collections::{HashMap, HashSet, VecDeque};

const SLOTS: usize = 2;
const THREADS: usize = 2;
/// Two double-hash rounds over the single two-slot line.
const PROBES: usize = 4;

/// Protocol orderings under check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// CAS to (memo, write), write data, store (memo, done).
    Correct,
    /// CAS to (memo, write), store (memo, done), then write data.
    DataAfterDone,
    /// CAS directly to (memo, done), then write data.
    MissingWriteBit,
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::Correct => "correct",
            Variant::DataAfterDone => "data-after-done",
            Variant::MissingWriteBit => "missing-write-bit",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "correct" => Ok(Variant::Correct),
            "data-after-done" => Ok(Variant::DataAfterDone),
            "missing-write-bit" => Ok(Variant::MissingWriteBit),
            other => Err(format!("unknown protocol variant `{other}`")),
        }
    }
}

/// Input shapes for the two threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Both threads insert the same vector.
    SameVector,
    /// Distinct vectors with distinct memos colliding on the one line.
    DistinctVectors,
    /// Distinct vectors whose memos collide: probing must compare data and
    /// keep going.
    SharedMemo,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::SameVector,
        Scenario::DistinctVectors,
        Scenario::SharedMemo,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Scenario::SameVector => "same-vector",
            Scenario::DistinctVectors => "distinct-vectors",
            Scenario::SharedMemo => "shared-memo",
        }
    }

    fn specs(&self) -> [ThreadSpec; THREADS] {
        let probes = [0u8, 1, 0, 1];
        match self {
            Scenario::SameVector => [
                ThreadSpec { vector: 0, memo: 1, probes },
                ThreadSpec { vector: 0, memo: 1, probes },
            ],
            Scenario::DistinctVectors => [
                ThreadSpec { vector: 0, memo: 1, probes },
                ThreadSpec { vector: 1, memo: 2, probes },
            ],
            Scenario::SharedMemo => [
                ThreadSpec { vector: 0, memo: 1, probes },
                ThreadSpec { vector: 1, memo: 1, probes },
            ],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ThreadSpec {
    vector: u8,
    memo: u8,
    probes: [u8; PROBES],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Word {
    Empty,
    Write(u8),
    Done(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Outcome {
    Inserted,
    Found,
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Phase {
    /// About to read the word at probe index.
    Probe(u8),
    /// Read an empty word there; about to CAS.
    TryCas(u8),
    /// Saw (my memo, write); re-reading until done.
    Waiting(u8),
    /// Saw (my memo, done); about to read the data cells.
    ReadData(u8),
    /// Claimed `claimed`; about to write the vector.
    WriteData,
    /// About to publish the done word.
    StoreDone,
    Finished(Outcome),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ThreadState {
    phase: Phase,
    claimed: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Global {
    words: [Word; SLOTS],
    data: [Option<u8>; SLOTS],
    threads: [ThreadState; THREADS],
}

impl Global {
    fn initial() -> Self {
        Global {
            words: [Word::Empty; SLOTS],
            data: [None; SLOTS],
            threads: [ThreadState {
                phase: Phase::Probe(0),
                claimed: 0,
            }; THREADS],
        }
    }

    fn all_finished(&self) -> bool {
        self.threads
            .iter()
            .all(|t| matches!(t.phase, Phase::Finished(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A reader observed a done word but the data cells were not complete.
    IncompleteRead,
    /// One vector ended up committed in more than one slot, or reported
    /// inserted by more than one call.
    DuplicateInsert,
    /// A vector every caller reported as found was never committed, or was
    /// never reported inserted.
    LostInsert,
    /// A two-vector run on a two-slot table reported exhaustion.
    UnexpectedExhaustion,
    /// A state outside the write wait that no step can leave.
    Stuck,
}

#[derive(Debug)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Numbered interleaving steps from the initial state to the failure.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ProtocolReport {
    pub states_explored: usize,
    pub terminal_states: usize,
}

enum StepResult {
    Next(Global, String),
    Violation(ViolationKind, String),
}

fn word_name(w: Word) -> String {
    match w {
        Word::Empty => "empty".into(),
        Word::Write(m) => format!("(m{m},write)"),
        Word::Done(m) => format!("(m{m},done)"),
    }
}

/// Execute thread `tid`'s next atomic step.
fn step(g: &Global, tid: usize, spec: &ThreadSpec, variant: Variant) -> Option<StepResult> {
    let me = g.threads[tid];
    let mut next = g.clone();
    let t = &mut next.threads[tid];
    let result = match me.phase {
        Phase::Finished(_) => return None,
        Phase::Probe(i) => {
            if usize::from(i) >= PROBES {
                t.phase = Phase::Finished(Outcome::Exhausted);
                StepResult::Next(next, format!("T{tid}: probes exhausted"))
            } else {
                let slot = spec.probes[usize::from(i)];
                let word = g.words[usize::from(slot)];
                t.phase = match word {
                    Word::Empty => Phase::TryCas(i),
                    Word::Write(m) if m == spec.memo => Phase::Waiting(i),
                    Word::Done(m) if m == spec.memo => Phase::ReadData(i),
                    _ => Phase::Probe(i + 1),
                };
                StepResult::Next(
                    next,
                    format!("T{tid}: read Bucket[{slot}] -> {}", word_name(word)),
                )
            }
        }
        Phase::TryCas(i) => {
            let slot = spec.probes[usize::from(i)];
            let word = g.words[usize::from(slot)];
            if word == Word::Empty {
                let claimed_word = match variant {
                    Variant::Correct | Variant::DataAfterDone => Word::Write(spec.memo),
                    Variant::MissingWriteBit => Word::Done(spec.memo),
                };
                next.words[usize::from(slot)] = claimed_word;
                t.claimed = slot;
                t.phase = match variant {
                    Variant::Correct => Phase::WriteData,
                    Variant::DataAfterDone => Phase::StoreDone,
                    Variant::MissingWriteBit => Phase::WriteData,
                };
                StepResult::Next(
                    next,
                    format!(
                        "T{tid}: CAS Bucket[{slot}] empty -> {} [ok]",
                        word_name(claimed_word)
                    ),
                )
            } else {
                // Lost the race; the CAS hands back the current word.
                t.phase = match word {
                    Word::Write(m) if m == spec.memo => Phase::Waiting(i),
                    Word::Done(m) if m == spec.memo => Phase::ReadData(i),
                    _ => Phase::Probe(i + 1),
                };
                StepResult::Next(
                    next,
                    format!(
                        "T{tid}: CAS Bucket[{slot}] failed, saw {}",
                        word_name(word)
                    ),
                )
            }
        }
        Phase::Waiting(i) => {
            let slot = spec.probes[usize::from(i)];
            let word = g.words[usize::from(slot)];
            match word {
                Word::Write(_) => {
                    // Still being written: the spin re-read leaves the
                    // state unchanged (the one admissible cycle).
                    StepResult::Next(next, format!("T{tid}: wait on Bucket[{slot}]"))
                }
                Word::Done(m) if m == spec.memo => {
                    t.phase = Phase::ReadData(i);
                    StepResult::Next(
                        next,
                        format!("T{tid}: read Bucket[{slot}] -> {}", word_name(word)),
                    )
                }
                other => StepResult::Violation(
                    ViolationKind::Stuck,
                    format!(
                        "T{tid}: bucket changed illegally under wait: {}",
                        word_name(other)
                    ),
                ),
            }
        }
        Phase::ReadData(i) => {
            let slot = spec.probes[usize::from(i)];
            match g.data[usize::from(slot)] {
                None => StepResult::Violation(
                    ViolationKind::IncompleteRead,
                    format!("T{tid}: read Data[{slot}] -> incomplete (done was visible)"),
                ),
                Some(v) if v == spec.vector => {
                    t.phase = Phase::Finished(Outcome::Found);
                    StepResult::Next(
                        next,
                        format!("T{tid}: read Data[{slot}] -> v{v}, match: return found"),
                    )
                }
                Some(v) => {
                    // True hash collision: same memo, different vector.
                    t.phase = Phase::Probe(i + 1);
                    StepResult::Next(
                        next,
                        format!("T{tid}: read Data[{slot}] -> v{v}, mismatch: keep probing"),
                    )
                }
            }
        }
        Phase::WriteData => {
            let slot = me.claimed;
            next.data[usize::from(slot)] = Some(spec.vector);
            t.phase = match variant {
                Variant::Correct => Phase::StoreDone,
                // Done already published at claim (MissingWriteBit) or
                // before this write (DataAfterDone): the call is finished.
                Variant::DataAfterDone | Variant::MissingWriteBit => {
                    Phase::Finished(Outcome::Inserted)
                }
            };
            StepResult::Next(
                next,
                format!("T{tid}: write Data[{slot}] <- v{}", spec.vector),
            )
        }
        Phase::StoreDone => {
            let slot = me.claimed;
            next.words[usize::from(slot)] = Word::Done(spec.memo);
            t.phase = match variant {
                Variant::Correct => Phase::Finished(Outcome::Inserted),
                Variant::DataAfterDone => Phase::WriteData,
                Variant::MissingWriteBit => unreachable!("claim already published done"),
            };
            StepResult::Next(
                next,
                format!("T{tid}: store Bucket[{slot}] <- (m{},done)", spec.memo),
            )
        }
    };
    Some(result)
}

/// Check every terminal interleaving outcome for set semantics.
fn terminal_violation(g: &Global, specs: &[ThreadSpec; THREADS]) -> Option<(ViolationKind, String)> {
    let vectors: HashSet<u8> = specs.iter().map(|s| s.vector).collect();
    for &v in &vectors {
        let committed = g
            .data
            .iter()
            .zip(&g.words)
            .filter(|(d, w)| **d == Some(v) && matches!(w, Word::Done(_)))
            .count();
        let inserted = specs
            .iter()
            .zip(&g.threads)
            .filter(|(s, t)| s.vector == v && t.phase == Phase::Finished(Outcome::Inserted))
            .count();
        if inserted > 1 || committed > 1 {
            return Some((
                ViolationKind::DuplicateInsert,
                format!("v{v}: {inserted} inserted results, {committed} committed slots"),
            ));
        }
        if inserted == 0 || committed == 0 {
            return Some((
                ViolationKind::LostInsert,
                format!("v{v}: {inserted} inserted results, {committed} committed slots"),
            ));
        }
    }
    if g.threads
        .iter()
        .any(|t| t.phase == Phase::Finished(Outcome::Exhausted))
    {
        return Some((
            ViolationKind::UnexpectedExhaustion,
            "probe sequence exhausted on a table with room".into(),
        ));
    }
    None
}

/// Exhaustively enumerate all interleavings of two abstract find-or-put
/// calls over a two-slot table.
pub fn check_bucket_protocol(
    variant: Variant,
    scenario: Scenario,
) -> Result<ProtocolReport, Box<Violation>> {
    let specs = scenario.specs();
    let init = Global::initial();
    let mut visited: HashSet<Global> = HashSet::from([init.clone()]);
    let mut parents: HashMap<Global, (Global, String)> = HashMap::new();
    let mut queue: VecDeque<Global> = VecDeque::from([init.clone()]);
    let mut terminal_states = 0usize;

    let trace_to = |parents: &HashMap<Global, (Global, String)>, end: &Global, last: String| {
        let mut steps = vec![last];
        let mut cur = end.clone();
        while let Some((prev, label)) = parents.get(&cur) {
            steps.push(label.clone());
            cur = prev.clone();
        }
        steps.reverse();
        steps
            .into_iter()
            .enumerate()
            .map(|(i, s)| format!("{}. {s}", i + 1))
            .collect()
    };

    while let Some(g) = queue.pop_front() {
        if g.all_finished() {
            terminal_states += 1;
            if let Some((kind, msg)) = terminal_violation(&g, &specs) {
                return Err(Box::new(Violation {
                    kind,
                    trace: trace_to(&parents, &g, format!("terminal check: {msg}")),
                }));
            }
            continue;
        }
        let mut progressed = false;
        for (tid, spec) in specs.iter().enumerate() {
            match step(&g, tid, spec, variant) {
                None => {}
                Some(StepResult::Violation(kind, label)) => {
                    return Err(Box::new(Violation {
                        kind,
                        trace: trace_to(&parents, &g, label),
                    }));
                }
                Some(StepResult::Next(next, _)) if next == g => {
                    // Wait self-loop; not progress.
                }
                Some(StepResult::Next(next, label)) => {
                    progressed = true;
                    if visited.insert(next.clone()) {
                        parents.insert(next.clone(), (g.clone(), label));
                        queue.push_back(next);
                    }
                }
            }
        }
        if !progressed {
            // Every enabled step is a wait self-loop: nobody can ever
            // finish the pending write.
            return Err(Box::new(Violation {
                kind: ViolationKind::Stuck,
                trace: trace_to(&parents, &g, "all remaining steps spin forever".into()),
            }));
        }
    }

    Ok(ProtocolReport {
        states_explored: visited.len(),
        terminal_states,
    })
}

/// Run all scenarios under one variant; first violation wins.
pub fn check_protocol_all(variant: Variant) -> Result<Vec<(Scenario, ProtocolReport)>, Box<Violation>> {
    Scenario::ALL
        .iter()
        .map(|&sc| check_bucket_protocol(variant, sc).map(|r| (sc, r)))
        .collect()
}
