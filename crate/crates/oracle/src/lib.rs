//! Reference state-space enumerators, written directly from the transition
//! tables they model and sharing no code with `tsm-core`.
//!
//! Both enumerators render states, action instances and rule labels in the
//! same canonical text form as the engine, so their results can be compared
//! as plain sets of strings.

pub mod enum_model;
pub mod mytodo;

use std::collections::BTreeSet;

/// `(from state, action instance, rule label, to state)`
pub type Edge = (String, String, String, String);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Enumeration {
    pub states: BTreeSet<String>,
    pub transitions: BTreeSet<Edge>,
    /// `(state, action name)` pairs where some instance matched no case.
    pub undefined: BTreeSet<(String, String)>,
    /// `(state, action instance)` pairs where a case could not be evaluated.
    pub errors: BTreeSet<(String, String)>,
    pub deadlocks: BTreeSet<String>,
}
