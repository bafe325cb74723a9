//! A binary search tree over distinct integers with a navigation cursor.
//!
//! Documented faults of the faulty variant:
//!
//! - `height` follows the left spine only (`height:postcondition:height_matches`);
//! - `go_up` from a right child whose parent is not the root jumps to the
//!   root (`go_up:postcondition:moved_to_parent`);
//! - `go_left` on a leaf root dereferences the missing child instead of
//!   raising its declared `no_child` (`go_left:undeclared:null_dereference`).

use super::super::{Arg, Check, FilterPolicy, OpKind, Ret, Subject, SubjectOperation, Slot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    value: i64,
    left: Option<usize>,
    right: Option<usize>,
    parent: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TreeState {
    nodes: Vec<Node>,
    cursor: Option<usize>,
}

impl TreeState {
    const ROOT: usize = 0;

    fn height_of(&self, node: Option<usize>) -> usize {
        node.map_or(0, |n| {
            1 + self
                .height_of(self.nodes[n].left)
                .max(self.height_of(self.nodes[n].right))
        })
    }

    fn root(&self) -> Option<usize> {
        (!self.nodes.is_empty()).then_some(Self::ROOT)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CursorTree {
    faulty: bool,
}

impl CursorTree {
    pub const FAULTS: &'static [(&'static str, FilterPolicy)] = &[
        ("cursor_tree.height:postcondition:height_matches", FilterPolicy::Contract),
        ("cursor_tree.go_up:postcondition:moved_to_parent", FilterPolicy::Contract),
        ("cursor_tree.go_left:undeclared:null_dereference", FilterPolicy::Exception),
    ];

    pub fn new(faulty: bool) -> Self {
        Self { faulty }
    }
}

#[cfg(test)]
const MAKE: usize = 0;
const INSERT: usize = 1;
const GO_ROOT: usize = 2;
const GO_LEFT: usize = 3;
const GO_RIGHT: usize = 4;
const GO_UP: usize = 5;
const ITEM: usize = 6;
const HEIGHT: usize = 7;
const CONTAINS: usize = 8;

static OPERATIONS: [SubjectOperation; 9] = [
    SubjectOperation { name: "make", kind: OpKind::Creator, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "insert", kind: OpKind::Mutator, slots: &[Slot::Int], declared_failures: &[] },
    SubjectOperation { name: "go_root", kind: OpKind::Mutator, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "go_left", kind: OpKind::Mutator, slots: &[], declared_failures: &["no_child"] },
    SubjectOperation { name: "go_right", kind: OpKind::Mutator, slots: &[], declared_failures: &["no_child"] },
    SubjectOperation { name: "go_up", kind: OpKind::Mutator, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "item", kind: OpKind::Query, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "height", kind: OpKind::Query, slots: &[], declared_failures: &[] },
    SubjectOperation { name: "contains", kind: OpKind::Query, slots: &[Slot::Int], declared_failures: &[] },
];

fn ensure(cond: bool, tag: &'static str) -> Check {
    if cond {
        Ok(())
    } else {
        Err(tag)
    }
}

impl Subject for CursorTree {
    type State = TreeState;

    fn name(&self) -> &'static str {
        "cursor_tree"
    }

    fn operations(&self) -> &'static [SubjectOperation] {
        &OPERATIONS
    }

    fn precondition(&self, op: usize, target: Option<&TreeState>, _args: &[Arg<TreeState>]) -> Check {
        let Some(t) = target else { return Ok(()) };
        match op {
            GO_ROOT => ensure(!t.nodes.is_empty(), "not_empty"),
            GO_LEFT | GO_RIGHT | ITEM => ensure(t.cursor.is_some(), "cursor_set"),
            GO_UP => {
                ensure(t.cursor.is_some(), "cursor_set")?;
                ensure(t.cursor != t.root(), "not_at_root")
            }
            _ => Ok(()),
        }
    }

    fn execute(&self, op: usize, target: Option<&mut TreeState>, args: &[Arg<TreeState>]) -> Result<Ret<TreeState>, &'static str> {
        let Some(t) = target else {
            return Ok(Ret::Created(TreeState::default()));
        };
        Ok(match op {
            INSERT => {
                let v = args[0].int();
                let fresh = t.nodes.len();
                let mut at = t.root();
                let mut parent = None;
                while let Some(n) = at {
                    let node = &t.nodes[n];
                    if v == node.value {
                        return Ok(Ret::Bool(false));
                    }
                    parent = Some((n, v < node.value));
                    at = if v < node.value { node.left } else { node.right };
                }
                t.nodes.push(Node {
                    value: v,
                    left: None,
                    right: None,
                    parent: parent.map(|p| p.0),
                });
                match parent {
                    Some((p, true)) => t.nodes[p].left = Some(fresh),
                    Some((p, false)) => t.nodes[p].right = Some(fresh),
                    None => {}
                }
                Ret::Bool(true)
            }
            GO_ROOT => {
                t.cursor = t.root();
                Ret::Unit
            }
            GO_LEFT | GO_RIGHT => {
                let c = t.cursor.expect("precondition");
                let node = t.nodes[c];
                let child = if op == GO_LEFT { node.left } else { node.right };
                match child {
                    Some(next) => t.cursor = Some(next),
                    None if self.faulty && op == GO_LEFT && c == TreeState::ROOT && node.right.is_none() => {
                        return Err("null_dereference")
                    }
                    None => return Err("no_child"),
                }
                Ret::Unit
            }
            GO_UP => {
                let c = t.cursor.expect("precondition");
                let parent = t.nodes[c].parent;
                let is_right_child = parent.is_some_and(|p| t.nodes[p].right == Some(c));
                t.cursor = if self.faulty && is_right_child { t.root() } else { parent };
                Ret::Unit
            }
            ITEM => Ret::Int(t.nodes[t.cursor.expect("precondition")].value),
            HEIGHT => {
                if self.faulty {
                    let mut h = 0;
                    let mut at = t.root();
                    while let Some(n) = at {
                        h += 1;
                        at = t.nodes[n].left;
                    }
                    Ret::Int(h)
                } else {
                    Ret::Int(t.height_of(t.root()) as i64)
                }
            }
            CONTAINS => Ret::Bool(t.nodes.iter().any(|n| n.value == args[0].int())),
            _ => unreachable!("cursor_tree has no operation {op}"),
        })
    }

    fn postcondition(
        &self,
        op: usize,
        old: Option<&TreeState>,
        new: &TreeState,
        args: &[Arg<TreeState>],
        ret: &Ret<TreeState>,
    ) -> Check {
        let Some(old) = old else {
            return ensure(new.nodes.is_empty() && new.cursor.is_none(), "empty_on_creation");
        };
        let has = |t: &TreeState, v: i64| t.nodes.iter().any(|n| n.value == v);
        match op {
            INSERT => {
                let v = args[0].int();
                ensure(has(new, v), "value_present")?;
                ensure(*ret == Ret::Bool(!has(old, v)), "reports_novelty")
            }
            GO_UP => {
                let c = old.cursor.unwrap();
                ensure(new.cursor == old.nodes[c].parent, "moved_to_parent")
            }
            GO_ROOT => ensure(new.cursor == Some(TreeState::ROOT), "at_root"),
            ITEM => ensure(*ret == Ret::Int(old.nodes[old.cursor.unwrap()].value), "value_at_cursor"),
            HEIGHT => ensure(*ret == Ret::Int(old.height_of(old.root()) as i64), "height_matches"),
            CONTAINS => ensure(*ret == Ret::Bool(has(old, args[0].int())), "agrees_with_nodes"),
            _ => Ok(()),
        }
    }

    fn invariant(&self, t: &TreeState) -> Check {
        ensure(t.cursor.is_none_or(|c| c < t.nodes.len()), "cursor_in_tree")?;
        let ordered = t.nodes.iter().all(|n| {
            n.left.is_none_or(|l| t.nodes[l].value < n.value) && n.right.is_none_or(|r| t.nodes[r].value > n.value)
        });
        ensure(ordered, "search_order")
    }
}

#[cfg(test)]
mod tests {
    use super::super::super::{call_with_contract, Failure, FailureKind};
    use super::*;

    fn run(tree: &CursorTree, calls: &[(usize, Option<i64>)]) -> Result<TreeState, Failure> {
        let mut s = call_with_contract(tree, MAKE, None, &[])?.unwrap();
        for &(op, v) in calls {
            let args: Vec<_> = v.map(Arg::Int).into_iter().collect();
            call_with_contract(tree, op, Some(&mut s), &args)?;
        }
        Ok(s)
    }

    #[test]
    fn right_leaning_height() {
        let calls = [(INSERT, Some(1)), (INSERT, Some(2)), (HEIGHT, None)];
        let err = run(&CursorTree::new(true), &calls).unwrap_err();
        assert_eq!(err.check, "height_matches");
        assert!(run(&CursorTree::new(false), &calls).is_ok());
    }

    #[test]
    fn deep_right_child_go_up() {
        let calls = [
            (INSERT, Some(1)),
            (INSERT, Some(2)),
            (INSERT, Some(3)),
            (GO_ROOT, None),
            (GO_RIGHT, None),
            (GO_RIGHT, None),
            (GO_UP, None),
        ];
        let err = run(&CursorTree::new(true), &calls).unwrap_err();
        assert_eq!((err.kind, err.check), (FailureKind::Postcondition, "moved_to_parent"));
        let s = run(&CursorTree::new(false), &calls).unwrap();
        assert_eq!(s.cursor, Some(1));
    }

    #[test]
    fn missing_children() {
        let calls = [(INSERT, Some(5)), (GO_ROOT, None), (GO_LEFT, None)];
        let err = run(&CursorTree::new(true), &calls).unwrap_err();
        assert_eq!((err.kind, err.check), (FailureKind::Undeclared, "null_dereference"));
        let err = run(&CursorTree::new(false), &calls).unwrap_err();
        assert_eq!((err.kind, err.check), (FailureKind::Declared, "no_child"));
    }
}
