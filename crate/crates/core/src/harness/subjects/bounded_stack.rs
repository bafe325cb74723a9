//! A stack of fixed capacity stored in a ring buffer, so that the bottom
//! element can be dropped in constant time.
//!
//! Documented faults of the faulty variant:
//!
//! - `pop` computes the top slot without wrapping and clamps it to the last
//!   slot, so after the buffer wraps it returns a stale element
//!   (`pop:postcondition:returns_top`);
//! - `item(i)` subtracts `i` from the wrapped top slot with a saturating
//!   subtraction, reading slot 0 when the sequence wraps below it
//!   (`item:postcondition:matches_sequence`);
//! - `force_push` on a full stack of capacity 1 forgets to drop the bottom
//!   element (`force_push:invariant:count_within_capacity`);
//! - `is_full` keeps a sentinel-slot comparison for capacities above 3 and
//!   reports fullness one element early (`is_full:postcondition:agrees_with_count`).

use super::super::{Arg, Check, FilterPolicy, OpKind, Ret, Slot, Subject, SubjectOperation};

pub const MAX_CAPACITY: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StackState {
    slots: Vec<i64>,
    start: usize,
    count: usize,
}

impl StackState {
    fn capacity(&self) -> usize {
        self.slots.len()
    }

    /// Elements bottom to top.
    fn sequence(&self) -> Vec<i64> {
        (0..self.count)
            .map(|j| self.slots[(self.start + j) % self.capacity()])
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BoundedStack {
    faulty: bool,
}

impl BoundedStack {
    pub const FAULTS: &'static [(&'static str, FilterPolicy)] = &[
        ("bounded_stack.pop:postcondition:returns_top", FilterPolicy::Contract),
        ("bounded_stack.item:postcondition:matches_sequence", FilterPolicy::Contract),
        ("bounded_stack.force_push:invariant:count_within_capacity", FilterPolicy::Contract),
        ("bounded_stack.is_full:postcondition:agrees_with_count", FilterPolicy::Contract),
    ];

    pub fn new(faulty: bool) -> Self {
        Self { faulty }
    }
}

const MAKE: usize = 0;
const PUSH: usize = 1;
const POP: usize = 2;
const DROP_BOTTOM: usize = 3;
const FORCE_PUSH: usize = 4;
const WIPE: usize = 5;
const TOP: usize = 6;
const ITEM: usize = 7;
const COUNT: usize = 8;
const IS_FULL: usize = 9;

const fn op(name: &'static str, kind: OpKind, slots: &'static [Slot]) -> SubjectOperation {
    SubjectOperation {
        name,
        kind,
        slots,
        declared_failures: &[],
    }
}

static OPERATIONS: [SubjectOperation; 10] = [
    op("make", OpKind::Creator, &[Slot::Int]),
    op("push", OpKind::Mutator, &[Slot::Int]),
    op("pop", OpKind::Mutator, &[]),
    op("drop_bottom", OpKind::Mutator, &[]),
    op("force_push", OpKind::Mutator, &[Slot::Int]),
    op("wipe", OpKind::Mutator, &[]),
    op("top", OpKind::Query, &[]),
    op("item", OpKind::Query, &[Slot::Int]),
    op("count", OpKind::Query, &[]),
    op("is_full", OpKind::Query, &[]),
];

fn ensure(cond: bool, tag: &'static str) -> Check {
    if cond {
        Ok(())
    } else {
        Err(tag)
    }
}

impl Subject for BoundedStack {
    type State = StackState;

    fn name(&self) -> &'static str {
        "bounded_stack"
    }

    fn operations(&self) -> &'static [SubjectOperation] {
        &OPERATIONS
    }

    fn precondition(&self, op: usize, target: Option<&StackState>, args: &[Arg<StackState>]) -> Check {
        match (op, target) {
            (MAKE, _) => ensure((1..=MAX_CAPACITY).contains(&args[0].int()), "capacity_in_range"),
            (PUSH, Some(s)) => ensure(s.count < s.capacity(), "not_full"),
            (POP | DROP_BOTTOM | TOP, Some(s)) => ensure(s.count > 0, "not_empty"),
            (ITEM, Some(s)) => ensure((0..s.count as i64).contains(&args[0].int()), "index_in_range"),
            _ => Ok(()),
        }
    }

    fn execute(
        &self,
        op: usize,
        target: Option<&mut StackState>,
        args: &[Arg<StackState>],
    ) -> Result<Ret<StackState>, &'static str> {
        let Some(s) = target else {
            let capacity = args[0].int() as usize;
            return Ok(Ret::Created(StackState {
                slots: vec![0; capacity],
                start: 0,
                count: 0,
            }));
        };
        let cap = s.capacity();
        Ok(match op {
            PUSH => {
                s.slots[(s.start + s.count) % cap] = args[0].int();
                s.count += 1;
                Ret::Unit
            }
            POP => {
                let top = if self.faulty {
                    (s.start + s.count - 1).min(cap - 1)
                } else {
                    (s.start + s.count - 1) % cap
                };
                s.count -= 1;
                Ret::Int(s.slots[top])
            }
            DROP_BOTTOM => {
                s.start = (s.start + 1) % cap;
                s.count -= 1;
                Ret::Unit
            }
            FORCE_PUSH => {
                if s.count == cap && !(self.faulty && cap == 1) {
                    s.start = (s.start + 1) % cap;
                    s.count -= 1;
                }
                s.slots[(s.start + s.count) % cap] = args[0].int();
                s.count += 1;
                Ret::Unit
            }
            WIPE => {
                s.start = 0;
                s.count = 0;
                Ret::Unit
            }
            TOP => Ret::Int(s.slots[(s.start + s.count - 1) % cap]),
            ITEM => {
                let i = args[0].int() as usize;
                let slot = if self.faulty {
                    ((s.start + s.count - 1) % cap).saturating_sub(i)
                } else {
                    (s.start + s.count - 1 - i) % cap
                };
                Ret::Int(s.slots[slot])
            }
            COUNT => Ret::Int(s.count as i64),
            IS_FULL => Ret::Bool(if self.faulty && cap > 3 {
                s.count >= cap - 1
            } else {
                s.count == cap
            }),
            _ => unreachable!("bounded_stack has no operation {op}"),
        })
    }

    fn postcondition(
        &self,
        op: usize,
        old: Option<&StackState>,
        new: &StackState,
        args: &[Arg<StackState>],
        ret: &Ret<StackState>,
    ) -> Check {
        let seq = new.sequence();
        let Some(old) = old else {
            return ensure(new.count == 0 && new.capacity() as i64 == args[0].int(), "empty_on_creation");
        };
        let before = old.sequence();
        match op {
            PUSH => {
                ensure(seq.last() == Some(&args[0].int()), "top_is_pushed")?;
                ensure(seq[..seq.len() - 1] == before[..], "keeps_items")
            }
            POP => {
                ensure(*ret == Ret::Int(*before.last().unwrap()), "returns_top")?;
                ensure(seq[..] == before[..before.len() - 1], "keeps_lower_items")
            }
            DROP_BOTTOM => ensure(seq[..] == before[1..], "keeps_upper_items"),
            FORCE_PUSH => ensure(seq.last() == Some(&args[0].int()), "top_is_pushed"),
            WIPE => ensure(seq.is_empty(), "empty_after_wipe"),
            TOP => ensure(*ret == Ret::Int(*before.last().unwrap()), "returns_top"),
            ITEM => {
                let i = args[0].int() as usize;
                ensure(*ret == Ret::Int(before[before.len() - 1 - i]), "matches_sequence")
            }
            COUNT => ensure(*ret == Ret::Int(before.len() as i64), "agrees_with_sequence"),
            IS_FULL => ensure(*ret == Ret::Bool(old.count == old.capacity()), "agrees_with_count"),
            _ => Ok(()),
        }
    }

    fn invariant(&self, s: &StackState) -> Check {
        ensure(s.count <= s.capacity(), "count_within_capacity")?;
        ensure(s.start < s.capacity(), "start_in_range")
    }
}
