//! An ascending list of integers, duplicates allowed.
//!
//! Documented faults of the faulty variant:
//!
//! - `insert` starts its binary search at position 1 once the list holds
//!   three or more items, so a new minimum lands second
//!   (`insert:invariant:sorted`);
//! - `index_of` returns the last occurrence of a duplicated value
//!   (`index_of:postcondition:first_occurrence`);
//! - `remove_min` skips its work on single-item lists
//!   (`remove_min:postcondition:count_decremented`);
//! - `merge` appends and only repairs the order when the final pair is
//!   inverted (`merge:invariant:sorted`);
//! - `at(i)` with `i` equal to the length indexes past the end instead of
//!   raising its declared `index_out_of_bounds`
//!   (`at:undeclared:slice_index_panic`).

use super::super::{Arg, Check, FilterPolicy, OpKind, Ret, Slot, Subject, SubjectOperation};

#[derive(Debug, Clone, Copy)]
pub struct SortedList {
    faulty: bool,
}

impl SortedList {
    pub const FAULTS: &'static [(&'static str, FilterPolicy)] = &[
        ("sorted_list.insert:invariant:sorted", FilterPolicy::Contract),
        ("sorted_list.index_of:postcondition:first_occurrence", FilterPolicy::Contract),
        ("sorted_list.remove_min:postcondition:count_decremented", FilterPolicy::Contract),
        ("sorted_list.merge:invariant:sorted", FilterPolicy::Contract),
        ("sorted_list.at:undeclared:slice_index_panic", FilterPolicy::Exception),
    ];

    pub fn new(faulty: bool) -> Self {
        Self { faulty }
    }
}

#[cfg(test)]
const MAKE: usize = 0;
const INSERT: usize = 1;
const REMOVE: usize = 2;
const REMOVE_MIN: usize = 3;
const MERGE: usize = 4;
const MIN: usize = 5;
const MAX: usize = 6;
const INDEX_OF: usize = 7;
const AT: usize = 8;
const COUNT: usize = 9;

static OPERATIONS: [SubjectOperation; 10] = [
    SubjectOperation { name: "make", kind: OpKind::Creator, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "insert", kind: OpKind::Mutator, slots: &[Slot::Int], declared_failures: &[] },
    SubjectOperation { name: "remove", kind: OpKind::Mutator, slots: &[Slot::Int], declared_failures: &[] },
    SubjectOperation { name: "remove_min", kind: OpKind::Mutator, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "merge", kind: OpKind::Mutator, slots: &[Slot::Object], declared_failures: &[] },
    SubjectOperation { name: "min", kind: OpKind::Query, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "max", kind: OpKind::Query, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "index_of", kind: OpKind::Query, slots: &[Slot::Int], declared_failures: &[] },
    SubjectOperation {
        name: "at",
        kind: OpKind::Query,
        slots: &[Slot::Int],
        declared_failures: &["index_out_of_bounds"],
    },
    SubjectOperation { name: "count", kind: OpKind::Query, slots: &[], declared_failures: &[] },
];

fn ensure(cond: bool, tag: &'static str) -> Check {
    if cond {
        Ok(())
    } else {
        Err(tag)
    }
}

fn occurrences(items: &[i64], v: i64) -> usize {
    items.iter().filter(|&&x| x == v).count()
}

impl Subject for SortedList {
    type State = Vec<i64>;

    fn name(&self) -> &'static str {
        "sorted_list"
    }

    fn operations(&self) -> &'static [SubjectOperation] {
        &OPERATIONS
    }

    fn precondition(&self, op: usize, target: Option<&Vec<i64>>, args: &[Arg<Vec<i64>>]) -> Check {
        match (op, target) {
            (REMOVE, Some(items)) => ensure(items.contains(&args[0].int()), "has_value"),
            (REMOVE_MIN | MIN | MAX, Some(items)) => ensure(!items.is_empty(), "not_empty"),
            _ => Ok(()),
        }
    }

    fn execute(&self, op: usize, target: Option<&mut Vec<i64>>, args: &[Arg<Vec<i64>>]) -> Result<Ret<Vec<i64>>, &'static str> {
        let Some(items) = target else {
            return Ok(Ret::Created(Vec::new()));
        };
        Ok(match op {
            INSERT => {
                let v = args[0].int();
                let lo = if self.faulty && items.len() >= 3 { 1 } else { 0 };
                let pos = lo + items[lo..].partition_point(|&x| x < v);
                items.insert(pos, v);
                Ret::Unit
            }
            REMOVE => {
                let pos = items.binary_search(&args[0].int()).expect("precondition");
                items.remove(pos);
                Ret::Unit
            }
            REMOVE_MIN => {
                if !(self.faulty && items.len() == 1) {
                    items.remove(0);
                }
                Ret::Unit
            }
            MERGE => {
                items.extend_from_slice(args[0].object());
                if self.faulty {
                    let n = items.len();
                    if n >= 2 && items[n - 2] > items[n - 1] {
                        items.sort_unstable();
                    }
                } else {
                    items.sort_unstable();
                }
                Ret::Unit
            }
            MIN => Ret::Int(items[0]),
            MAX => Ret::Int(*items.last().unwrap()),
            INDEX_OF => {
                let v = args[0].int();
                let found = if self.faulty {
                    items.iter().rposition(|&x| x == v)
                } else {
                    items.iter().position(|&x| x == v)
                };
                Ret::Int(found.map_or(-1, |i| i as i64))
            }
            AT => {
                let i = args[0].int();
                let len = items.len() as i64;
                if self.faulty && i == len {
                    return Err("slice_index_panic");
                }
                if !(0..len).contains(&i) {
                    return Err("index_out_of_bounds");
                }
                Ret::Int(items[i as usize])
            }
            COUNT => Ret::Int(items.len() as i64),
            _ => unreachable!("sorted_list has no operation {op}"),
        })
    }

    fn postcondition(
        &self,
        op: usize,
        old: Option<&Vec<i64>>,
        new: &Vec<i64>,
        args: &[Arg<Vec<i64>>],
        ret: &Ret<Vec<i64>>,
    ) -> Check {
        let Some(old) = old else {
            return ensure(new.is_empty(), "empty_on_creation");
        };
        match op {
            INSERT => {
                let v = args[0].int();
                ensure(new.len() == old.len() + 1, "count_incremented")?;
                ensure(occurrences(new, v) == occurrences(old, v) + 1, "value_added")
            }
            REMOVE => {
                let v = args[0].int();
                ensure(occurrences(new, v) + 1 == occurrences(old, v), "one_fewer_of_value")
            }
            REMOVE_MIN => ensure(new.len() + 1 == old.len(), "count_decremented"),
            MERGE => ensure(new.len() == old.len() + args[0].object().len(), "counts_add_up"),
            MIN => ensure(Some(ret) == old.iter().min().map(|&m| Ret::Int(m)).as_ref(), "is_smallest"),
            MAX => ensure(Some(ret) == old.iter().max().map(|&m| Ret::Int(m)).as_ref(), "is_largest"),
            INDEX_OF => {
                let v = args[0].int();
                let expected = old.iter().position(|&x| x == v).map_or(-1, |i| i as i64);
                ensure(*ret == Ret::Int(expected), "first_occurrence")
            }
            AT => ensure(*ret == Ret::Int(old[args[0].int() as usize]), "matches_position"),
            COUNT => ensure(*ret == Ret::Int(old.len() as i64), "agrees_with_items"),
            _ => Ok(()),
        }
    }

    fn invariant(&self, items: &Vec<i64>) -> Check {
        ensure(items.windows(2).all(|w| w[0] <= w[1]), "sorted")
    }
}
