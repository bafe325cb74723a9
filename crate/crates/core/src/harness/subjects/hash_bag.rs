//! A multiset of integers kept in four buckets chained by value.
//!
//! Documented faults of the faulty variant:
//!
//! - `occurrences` hashes with the absolute remainder, so negative values
//!   not divisible by four are looked up in the wrong bucket
//!   (`occurrences:postcondition:agrees_with_content`);
//! - `remove` pops the bucket's last entry once the bucket holds three or
//!   more, whatever the value asked for (`remove:postcondition:one_fewer_of_value`);
//! - `union` refuses combined sizes above eight with an undeclared error,
//!   although the bag is unbounded (`union:undeclared:capacity_exceeded`).
//!
//! `add` raises its declared `bucket_full` when a bucket already holds
//! eight entries.

use super::super::{Arg, Check, FilterPolicy, OpKind, Ret, Slot, Subject, SubjectOperation};

const BUCKETS: usize = 4;
const BUCKET_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BagState {
    buckets: [Vec<i64>; BUCKETS],
}

impl BagState {
    fn count(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    fn occurrences(&self, v: i64) -> usize {
        self.buckets.iter().flatten().filter(|&&x| x == v).count()
    }
}

fn bucket(v: i64) -> usize {
    v.rem_euclid(BUCKETS as i64) as usize
}

#[derive(Debug, Clone, Copy)]
pub struct HashBag {
    faulty: bool,
}

impl HashBag {
    pub const FAULTS: &'static [(&'static str, FilterPolicy)] = &[
        ("hash_bag.occurrences:postcondition:agrees_with_content", FilterPolicy::Contract),
        ("hash_bag.remove:postcondition:one_fewer_of_value", FilterPolicy::Contract),
        ("hash_bag.union:undeclared:capacity_exceeded", FilterPolicy::Exception),
    ];

    pub fn new(faulty: bool) -> Self {
        Self { faulty }
    }
}

#[cfg(test)]
const MAKE: usize = 0;
const ADD: usize = 1;
const REMOVE: usize = 2;
const UNION: usize = 3;
const OCCURRENCES: usize = 4;
const COUNT: usize = 5;
const IS_EMPTY: usize = 6;

static OPERATIONS: [SubjectOperation; 7] = [
    SubjectOperation { name: "make", kind: OpKind::Creator, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "add", kind: OpKind::Mutator, slots: &[Slot::Int], declared_failures: &["bucket_full"] },
    SubjectOperation { name: "remove", kind: OpKind::Mutator, slots: &[Slot::Int], declared_failures: &[] },
    SubjectOperation { name: "union", kind: OpKind::Mutator, slots: &[Slot::Object], declared_failures: &["bucket_full"] },
    SubjectOperation { name: "occurrences", kind: OpKind::Query, slots: &[Slot::Int], declared_failures: &[] },
    SubjectOperation { name: "count", kind: OpKind::Query, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "is_empty", kind: OpKind::Query, slots: &[], declared_failures: &[] },
];

fn ensure(cond: bool, tag: &'static str) -> Check {
    if cond {
        Ok(())
    } else {
        Err(tag)
    }
}

impl Subject for HashBag {
    type State = BagState;

    fn name(&self) -> &'static str {
        "hash_bag"
    }

    fn operations(&self) -> &'static [SubjectOperation] {
        &OPERATIONS
    }

    fn precondition(&self, op: usize, target: Option<&BagState>, args: &[Arg<BagState>]) -> Check {
        match (op, target) {
            (REMOVE, Some(bag)) => ensure(bag.occurrences(args[0].int()) > 0, "has_value"),
            _ => Ok(()),
        }
    }

    fn execute(&self, op: usize, target: Option<&mut BagState>, args: &[Arg<BagState>]) -> Result<Ret<BagState>, &'static str> {
        let Some(bag) = target else {
            return Ok(Ret::Created(BagState::default()));
        };
        Ok(match op {
            ADD => {
                let v = args[0].int();
                let b = &mut bag.buckets[bucket(v)];
                if b.len() >= BUCKET_LIMIT {
                    return Err("bucket_full");
                }
                b.push(v);
                Ret::Unit
            }
            REMOVE => {
                let v = args[0].int();
                let b = &mut bag.buckets[bucket(v)];
                if self.faulty && b.len() >= 3 {
                    b.pop();
                } else {
                    let pos = b.iter().position(|&x| x == v).expect("precondition");
                    b.swap_remove(pos);
                }
                Ret::Unit
            }
            UNION => {
                let other = args[0].object();
                if self.faulty && bag.count() + other.count() > BUCKET_LIMIT {
                    return Err("capacity_exceeded");
                }
                for (mine, theirs) in bag.buckets.iter_mut().zip(&other.buckets) {
                    if mine.len() + theirs.len() > BUCKET_LIMIT {
                        return Err("bucket_full");
                    }
                    mine.extend_from_slice(theirs);
                }
                Ret::Unit
            }
            OCCURRENCES => {
                let v = args[0].int();
                let b = if self.faulty {
                    (v % BUCKETS as i64).unsigned_abs() as usize
                } else {
                    bucket(v)
                };
                Ret::Int(bag.buckets[b].iter().filter(|&&x| x == v).count() as i64)
            }
            COUNT => Ret::Int(bag.count() as i64),
            IS_EMPTY => Ret::Bool(bag.count() == 0),
            _ => unreachable!("hash_bag has no operation {op}"),
        })
    }

    fn postcondition(
        &self,
        op: usize,
        old: Option<&BagState>,
        new: &BagState,
        args: &[Arg<BagState>],
        ret: &Ret<BagState>,
    ) -> Check {
        let Some(old) = old else {
            return ensure(new.count() == 0, "empty_on_creation");
        };
        match op {
            ADD => ensure(new.occurrences(args[0].int()) == old.occurrences(args[0].int()) + 1, "one_more_of_value"),
            REMOVE => {
                let v = args[0].int();
                ensure(new.occurrences(v) + 1 == old.occurrences(v), "one_fewer_of_value")?;
                ensure(new.count() + 1 == old.count(), "count_decremented")
            }
            UNION => ensure(new.count() == old.count() + args[0].object().count(), "counts_add_up"),
            OCCURRENCES => ensure(*ret == Ret::Int(old.occurrences(args[0].int()) as i64), "agrees_with_content"),
            COUNT => ensure(*ret == Ret::Int(old.count() as i64), "agrees_with_content"),
            IS_EMPTY => ensure(*ret == Ret::Bool(old.count() == 0), "agrees_with_count"),
            _ => Ok(()),
        }
    }

    fn invariant(&self, bag: &BagState) -> Check {
        let placed = bag
            .buckets
            .iter()
            .enumerate()
            .all(|(i, b)| b.len() <= BUCKET_LIMIT && b.iter().all(|&v| bucket(v) == i));
        ensure(placed, "values_in_home_bucket")
    }
}
