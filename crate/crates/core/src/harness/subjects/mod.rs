//! Built-in subjects. Each one ships with a few documented edge-case
//! faults; constructing it with `faulty = false` gives the corrected
//! variant, which has none.

mod bounded_stack;
mod cursor_tree;
mod hash_bag;
mod sorted_list;

pub use bounded_stack::BoundedStack;
pub use cursor_tree::CursorTree;
pub use hash_bag::HashBag;
pub use sorted_list::SortedList;

use super::DynSubject;

const NAMES: [&str; 4] = ["bounded_stack", "sorted_list", "hash_bag", "cursor_tree"];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

pub fn builtin(name: &str, faulty: bool) -> Option<Box<dyn DynSubject>> {
    Some(match name {
        "bounded_stack" => Box::new(BoundedStack::new(faulty)),
        "sorted_list" => Box::new(SortedList::new(faulty)),
        "hash_bag" => Box::new(HashBag::new(faulty)),
        "cursor_tree" => Box::new(CursorTree::new(faulty)),
        _ => return None,
    })
}

pub fn builtin_subjects(faulty: bool) -> Vec<Box<dyn DynSubject>> {
    NAMES.iter().map(|n| builtin(n, faulty).unwrap()).collect()
}
