//! Pool-based random testing of contract-equipped subjects.
//!
//! A session starts with an empty object pool. Each round picks, uniformly,
//! one operation whose receiver and object arguments can be supplied from
//! the pool (so the first round always calls a creator), fills integer and
//! boolean slots at random, and runs the call under its contract:
//!
//! 1. precondition; a violation is the caller's fault and is never counted;
//! 2. body; it may raise an exception token, declared or not;
//! 3. postcondition, then the class invariant.
//!
//! A failed call leaves the receiver as it was before the call. Successful
//! creator calls add their object to the pool.
//!
//! Failures are identified by `subject.operation:kind:check`, where `check`
//! names the failing assertion or the raised token, so the same fault
//! reached with different argument values has one signature.

mod subjects;

use std::any::Any;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use subjects::{builtin, builtin_names, builtin_subjects, BoundedStack, CursorTree, HashBag, SortedList};

use crate::curves::FailureEvent;
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Creator,
    Mutator,
    Query,
}

/// Kind of value an argument slot takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Int,
    Bool,
    /// Another pooled object of the same subject.
    Object,
}

/// Static description of one subject operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubjectOperation {
    pub name: &'static str,
    pub kind: OpKind,
    /// Argument slots, not counting the receiver of mutators and queries.
    pub slots: &'static [Slot],
    /// Exception tokens the operation documents as part of its interface.
    pub declared_failures: &'static [&'static str],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg<S> {
    Int(i64),
    Bool(bool),
    Object(S),
}

impl<S> Arg<S> {
    pub fn int(&self) -> i64 {
        match self {
            Arg::Int(v) => *v,
            _ => panic!("argument is not an integer"),
        }
    }

    pub fn boolean(&self) -> bool {
        match self {
            Arg::Bool(v) => *v,
            _ => panic!("argument is not a boolean"),
        }
    }

    pub fn object(&self) -> &S {
        match self {
            Arg::Object(s) => s,
            _ => panic!("argument is not an object"),
        }
    }
}

/// What an operation returns.
#[derive(Debug, Clone, PartialEq)]
pub enum Ret<S> {
    Unit,
    Int(i64),
    Bool(bool),
    Created(S),
}

/// Outcome of a contract check: `Err` carries the failing assertion's tag.
pub type Check = std::result::Result<(), &'static str>;

/// A data structure under test, with its executable contract.
///
/// `precondition`, `postcondition` and `invariant` must be total: they
/// return `Err(tag)` on violation and never panic.
pub trait Subject: Send + Sync + 'static {
    type State: Clone + Send + Sync + 'static;

    fn name(&self) -> &'static str;

    fn operations(&self) -> &'static [SubjectOperation];

    fn precondition(&self, op: usize, target: Option<&Self::State>, args: &[Arg<Self::State>]) -> Check;

    /// Runs the body. `Err(token)` models a raised exception.
    fn execute(
        &self,
        op: usize,
        target: Option<&mut Self::State>,
        args: &[Arg<Self::State>],
    ) -> std::result::Result<Ret<Self::State>, &'static str>;

    /// `old` is the receiver before the call, `new` the receiver after it
    /// (or the created object for creators).
    fn postcondition(
        &self,
        op: usize,
        old: Option<&Self::State>,
        new: &Self::State,
        args: &[Arg<Self::State>],
        ret: &Ret<Self::State>,
    ) -> Check;

    fn invariant(&self, state: &Self::State) -> Check;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FailureKind {
    Precondition,
    Postcondition,
    Invariant,
    Declared,
    Undeclared,
}

impl FailureKind {
    pub fn token(self) -> &'static str {
        match self {
            FailureKind::Precondition => "precondition",
            FailureKind::Postcondition => "postcondition",
            FailureKind::Invariant => "invariant",
            FailureKind::Declared => "declared",
            FailureKind::Undeclared => "undeclared",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Which failures count as faults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterPolicy {
    /// Contracts are the oracle: postcondition and invariant violations
    /// count.
    #[default]
    Contract,
    /// No contracts: only undeclared exceptions count.
    Exception,
}

impl std::str::FromStr for FilterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contract" => Ok(FilterPolicy::Contract),
            "exception" => Ok(FilterPolicy::Exception),
            other => Err(Error::InvalidArgument(format!("unknown policy `{other}`"))),
        }
    }
}

impl fmt::Display for FilterPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterPolicy::Contract => "contract",
            FilterPolicy::Exception => "exception",
        })
    }
}

/// Whether a failure of `kind` counts under `policy`.
pub fn classify(kind: FailureKind, policy: FilterPolicy) -> bool {
    match (kind, policy) {
        (FailureKind::Precondition | FailureKind::Declared, _) => false,
        (FailureKind::Postcondition | FailureKind::Invariant, policy) => policy == FilterPolicy::Contract,
        (FailureKind::Undeclared, policy) => policy == FilterPolicy::Exception,
    }
}

/// A failed call as observed by the contract checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Failure {
    pub kind: FailureKind,
    /// Failing assertion tag or raised token.
    pub check: &'static str,
}

pub fn signature(subject: &str, operation: &str, failure: Failure) -> String {
    format!("{subject}.{operation}:{}:{}", failure.kind, failure.check)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureRecord {
    pub test_index: u64,
    /// `subject.operation`
    pub operation: String,
    pub kind: FailureKind,
    pub check: &'static str,
    pub signature: String,
    pub counted: bool,
}

impl FailureRecord {
    pub fn to_event(&self, session_id: u64) -> FailureEvent {
        FailureEvent::new(session_id, self.test_index, self.signature.clone(), self.counted)
    }
}

/// Runs one call under its contract. On any failure the receiver is
/// restored to its state before the call.
pub fn call_with_contract<S: Subject>(
    subject: &S,
    op: usize,
    target: Option<&mut S::State>,
    args: &[Arg<S::State>],
) -> std::result::Result<Option<S::State>, Failure> {
    let info = &subject.operations()[op];
    let fail = |kind, check| Failure { kind, check };

    subject
        .precondition(op, target.as_deref(), args)
        .map_err(|tag| fail(FailureKind::Precondition, tag))?;

    match target {
        Some(receiver) => {
            let old = receiver.clone();
            let outcome = subject.execute(op, Some(receiver), args);
            let checked = match outcome {
                Err(token) if info.declared_failures.contains(&token) => Err(fail(FailureKind::Declared, token)),
                Err(token) => Err(fail(FailureKind::Undeclared, token)),
                Ok(ret) => subject
                    .postcondition(op, Some(&old), receiver, args, &ret)
                    .map_err(|tag| fail(FailureKind::Postcondition, tag))
                    .and_then(|_| {
                        subject
                            .invariant(receiver)
                            .map_err(|tag| fail(FailureKind::Invariant, tag))
                    }),
            };
            if checked.is_err() {
                *receiver = old;
            }
            checked.map(|_| None)
        }
        None => {
            let ret = match subject.execute(op, None, args) {
                Err(token) if info.declared_failures.contains(&token) => {
                    return Err(fail(FailureKind::Declared, token))
                }
                Err(token) => return Err(fail(FailureKind::Undeclared, token)),
                Ok(ret) => ret,
            };
            let Ret::Created(obj) = &ret else {
                return Err(fail(FailureKind::Undeclared, "creator_returned_no_object"));
            };
            subject
                .postcondition(op, None, obj, args, &ret)
                .map_err(|tag| fail(FailureKind::Postcondition, tag))?;
            subject
                .invariant(obj)
                .map_err(|tag| fail(FailureKind::Invariant, tag))?;
            match ret {
                Ret::Created(obj) => Ok(Some(obj)),
                _ => unreachable!(),
            }
        }
    }
}

type Boxed = Box<dyn Any + Send + Sync>;

/// Type-erased view of a [`Subject`], so one pool can hold several
/// subjects.
pub trait DynSubject: Send + Sync {
    fn name(&self) -> &'static str;
    fn operations(&self) -> &'static [SubjectOperation];
    fn call(&self, op: usize, target: Option<&mut Boxed>, args: &[Arg<Boxed>]) -> std::result::Result<Option<Boxed>, Failure>;
    fn clone_state(&self, state: &Boxed) -> Boxed;
}

impl<S: Subject> DynSubject for S {
    fn name(&self) -> &'static str {
        Subject::name(self)
    }

    fn operations(&self) -> &'static [SubjectOperation] {
        Subject::operations(self)
    }

    fn call(&self, op: usize, target: Option<&mut Boxed>, args: &[Arg<Boxed>]) -> std::result::Result<Option<Boxed>, Failure> {
        let typed: Vec<Arg<S::State>> = args
            .iter()
            .map(|a| match a {
                Arg::Int(v) => Arg::Int(*v),
                Arg::Bool(v) => Arg::Bool(*v),
                Arg::Object(o) => Arg::Object(downcast::<S>(o).clone()),
            })
            .collect();
        let target = target.map(|b| b.downcast_mut::<S::State>().expect("pooled object of the wrong subject"));
        call_with_contract(self, op, target, &typed).map(|created| created.map(|s| Box::new(s) as Boxed))
    }

    fn clone_state(&self, state: &Boxed) -> Boxed {
        Box::new(downcast::<S>(state).clone())
    }
}

fn downcast<S: Subject>(b: &Boxed) -> &S::State {
    b.downcast_ref::<S::State>().expect("pooled object of the wrong subject")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    /// Rounds (test cases) per session.
    pub draws: u64,
    pub seed: u64,
    pub policy: FilterPolicy,
    /// Inclusive range integer arguments are drawn from.
    pub int_range: (i64, i64),
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            draws: 10_000,
            seed: 0,
            policy: FilterPolicy::Contract,
            int_range: (-32, 32),
        }
    }
}

struct Pooled {
    subject: usize,
    state: Boxed,
}

/// Runs one session and returns every failure it observed, counted or not.
pub fn run_session_records(
    subjects: &[&dyn DynSubject],
    session_id: u64,
    cfg: &SessionConfig,
) -> Result<Vec<FailureRecord>> {
    if cfg.draws == 0 {
        return Err(Error::InvalidArgument("a session needs at least one draw".into()));
    }
    if cfg.int_range.0 > cfg.int_range.1 {
        return Err(Error::InvalidArgument("empty integer range".into()));
    }
    let has_creator = subjects
        .iter()
        .any(|s| s.operations().iter().any(|o| o.kind == OpKind::Creator));
    if !has_creator {
        return Err(Error::InvalidArgument("subjects offer no creator".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(session_id);

    let mut pool: Vec<Pooled> = Vec::new();
    let mut by_subject: Vec<Vec<usize>> = vec![Vec::new(); subjects.len()];
    // (subject, operation) pairs callable with the current pool.
    let mut callable: Vec<(usize, usize)> = Vec::new();
    let refresh = |by_subject: &[Vec<usize>], callable: &mut Vec<(usize, usize)>| {
        callable.clear();
        for (si, s) in subjects.iter().enumerate() {
            for (oi, op) in s.operations().iter().enumerate() {
                let needs_object = op.kind != OpKind::Creator || op.slots.contains(&Slot::Object);
                if !needs_object || !by_subject[si].is_empty() {
                    callable.push((si, oi));
                }
            }
        }
    };
    refresh(&by_subject, &mut callable);

    let mut records = Vec::new();
    for round in 1..=cfg.draws {
        let (si, oi) = callable[rng.random_range(0..callable.len())];
        let subject = subjects[si];
        let op = &subject.operations()[oi];

        let args: Vec<Arg<Boxed>> = op
            .slots
            .iter()
            .map(|slot| match slot {
                Slot::Int => Arg::Int(rng.random_range(cfg.int_range.0..=cfg.int_range.1)),
                Slot::Bool => Arg::Bool(rng.random()),
                Slot::Object => {
                    let objs = &by_subject[si];
                    let pick = objs[rng.random_range(0..objs.len())];
                    Arg::Object(subject.clone_state(&pool[pick].state))
                }
            })
            .collect();

        let outcome = if op.kind == OpKind::Creator {
            subject.call(oi, None, &args)
        } else {
            let objs = &by_subject[si];
            let pick = objs[rng.random_range(0..objs.len())];
            subject.call(oi, Some(&mut pool[pick].state), &args)
        };

        match outcome {
            Ok(Some(created)) => {
                let fresh_subject = by_subject[si].is_empty();
                by_subject[si].push(pool.len());
                pool.push(Pooled {
                    subject: si,
                    state: created,
                });
                if fresh_subject {
                    refresh(&by_subject, &mut callable);
                }
            }
            Ok(None) => {}
            Err(failure) => {
                let operation = format!("{}.{}", subject.name(), op.name);
                records.push(FailureRecord {
                    test_index: round,
                    signature: signature(subject.name(), op.name, failure),
                    operation,
                    kind: failure.kind,
                    check: failure.check,
                    counted: classify(failure.kind, cfg.policy),
                });
            }
        }
    }
    debug_assert!(pool.iter().all(|p| p.subject < subjects.len()));
    Ok(records)
}

/// Runs one session and returns its failure-event log.
pub fn run_session(subjects: &[&dyn DynSubject], session_id: u64, cfg: &SessionConfig) -> Result<Vec<FailureEvent>> {
    Ok(run_session_records(subjects, session_id, cfg)?
        .iter()
        .map(|r| r.to_event(session_id))
        .collect())
}

/// Runs `sessions` independent sessions `0..sessions`, each on its own
/// random stream.
pub fn run_sessions(
    subjects: &[&dyn DynSubject],
    sessions: usize,
    cfg: &SessionConfig,
) -> Result<Vec<Vec<FailureEvent>>> {
    par::map_range(sessions, |i| run_session(subjects, i as u64, cfg))
        .into_iter()
        .collect()
}

/// Result of a bounded exhaustive exploration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    /// Signatures of counted failures reachable within the depth bound.
    pub signatures: BTreeSet<String>,
    pub states_visited: usize,
}

/// Enumerates every call sequence of length at most `depth` on a single
/// object (the creator call counts as the first call), with integer
/// arguments from `ints`, booleans both ways, and object arguments taken
/// from the receiver itself and the freshly created objects.
///
/// Sequences are explored breadth-first with duplicate states merged, so
/// the search is exhaustive for the given argument domain.
pub fn enumerate_reachable_faults<S>(subject: &S, depth: usize, ints: &[i64], policy: FilterPolicy) -> Exploration
where
    S: Subject,
    S::State: Eq + Hash,
{
    let ops = subject.operations();
    let mut signatures = BTreeSet::new();
    let mut record = |op: &SubjectOperation, f: Failure| {
        if classify(f.kind, policy) {
            signatures.insert(signature(subject.name(), op.name, f));
        }
    };
    if depth == 0 {
        return Exploration {
            signatures: BTreeSet::new(),
            states_visited: 0,
        };
    }

    let arg_lists = |op: &SubjectOperation, objects: &[S::State]| -> Vec<Vec<Arg<S::State>>> {
        let mut lists: Vec<Vec<Arg<S::State>>> = vec![Vec::new()];
        for slot in op.slots {
            let choices: Vec<Arg<S::State>> = match slot {
                Slot::Int => ints.iter().map(|&v| Arg::Int(v)).collect(),
                Slot::Bool => vec![Arg::Bool(false), Arg::Bool(true)],
                Slot::Object => objects.iter().cloned().map(Arg::Object).collect(),
            };
            lists = lists
                .into_iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |c| {
                        let mut next = prefix.clone();
                        next.push(c.clone());
                        next
                    })
                })
                .collect();
        }
        lists
    };

    let mut seen: HashSet<S::State> = HashSet::new();
    let mut frontier: Vec<S::State> = Vec::new();
    let mut fresh: Vec<S::State> = Vec::new();
    for (oi, op) in ops.iter().enumerate().filter(|(_, o)| o.kind == OpKind::Creator) {
        for args in arg_lists(op, &[]) {
            match call_with_contract(subject, oi, None, &args) {
                Ok(Some(obj)) => {
                    if seen.insert(obj.clone()) {
                        fresh.push(obj.clone());
                        frontier.push(obj);
                    }
                }
                Ok(None) => {}
                Err(f) => record(op, f),
            }
        }
    }

    for _ in 1..depth {
        let mut next = Vec::new();
        for state in &frontier {
            let mut objects = vec![state.clone()];
            objects.extend(fresh.iter().cloned());
            for (oi, op) in ops.iter().enumerate().filter(|(_, o)| o.kind != OpKind::Creator) {
                for args in arg_lists(op, &objects) {
                    let mut receiver = state.clone();
                    match call_with_contract(subject, oi, Some(&mut receiver), &args) {
                        Ok(_) => {
                            if op.kind == OpKind::Mutator && seen.insert(receiver.clone()) {
                                next.push(receiver);
                            }
                        }
                        Err(f) => record(op, f),
                    }
                }
            }
        }
        frontier = next;
    }

    Exploration {
        signatures,
        states_visited: seen.len(),
    }
}

/// Integer domain used by default for exhaustive exploration: small
/// capacities and indices, repeated and distinct values, and a negative
/// value that shares a hash bucket with a positive one.
pub const EXPLORATION_INTS: [i64; 6] = [-3, 0, 1, 2, 4, 5];
