//! myTodo, enumerated case by case from its transition table:
//!
//! ```text
//! (S, l + {t}, t)  if e = Add
//! (A, l - {t}, t)  if e = Remove, s != N, |l| > 1, status(t) != done, |inprogress(l)| = 1
//! (S, l - {t}, t)  if e = Remove, s != N, |l| > 1
//! (N, l - {t}, t)  if e = Remove, s != N, |l| = 1
//! (S, l', t)       if e = MarkDone, s = S, |inprogress(l)| > 1
//! (A, l', t)       if e = MarkDone, s = S, |inprogress(l)| = 1
//! ```
//!
//! where `l'` is `l` with `t` marked done. The all-done Remove case is tried
//! before the general one, and only when `t` is listed. Looking up the status
//! of an id listed twice is an error.

use std::collections::{BTreeSet, VecDeque};

use crate::Enumeration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Phase {
    N,
    S,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Status {
    NotDone,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct State {
    s: Phase,
    l: Vec<(String, Status)>,
    last: Option<String>,
}

impl State {
    fn render(&self) -> String {
        let s = match self.s {
            Phase::N => "Phase.N",
            Phase::S => "Phase.S",
            Phase::A => "Phase.A",
        };
        let items: Vec<String> = self
            .l
            .iter()
            .map(|(id, st)| {
                let st = match st {
                    Status::NotDone => "Status.notdone",
                    Status::Done => "Status.done",
                };
                format!("{{id: {id}, status: {st}}}")
            })
            .collect();
        let last = self.last.as_deref().unwrap_or("none");
        format!("{{s: {s}, l: [{}], last: {last}}}", items.join(", "))
    }

    fn in_progress(&self) -> usize {
        self.l.iter().filter(|(_, st)| *st != Status::Done).count()
    }

    fn without(&self, t: &str) -> Vec<(String, Status)> {
        self.l.iter().filter(|(id, _)| id != t).cloned().collect()
    }

    fn marked_done(&self, t: &str) -> Vec<(String, Status)> {
        self.l.iter().map(|(id, st)| (id.clone(), if id == t { Status::Done } else { *st })).collect()
    }
}

enum Outcome {
    Next(&'static str, State),
    Undefined,
    Error,
}

fn apply(x: &State, action: &str, t: &str) -> Outcome {
    let last = Some(t.to_string());
    match action {
        "Add" => {
            let mut l = x.l.clone();
            l.push((t.to_string(), Status::NotDone));
            Outcome::Next("add", State { s: Phase::S, l, last })
        }
        "Remove" => {
            if x.s == Phase::N {
                return Outcome::Undefined;
            }
            let listed = x.l.iter().filter(|(id, _)| id == t).count();
            if x.l.len() > 1 && listed > 0 {
                if listed > 1 {
                    return Outcome::Error;
                }
                let status = x.l.iter().find(|(id, _)| id == t).map(|(_, st)| *st).expect("listed");
                if status != Status::Done && x.in_progress() == 1 {
                    return Outcome::Next("remove_alldone", State { s: Phase::A, l: x.without(t), last });
                }
            }
            if x.l.len() > 1 {
                Outcome::Next("remove", State { s: Phase::S, l: x.without(t), last })
            } else if x.l.len() == 1 {
                Outcome::Next("remove_last", State { s: Phase::N, l: x.without(t), last })
            } else {
                Outcome::Undefined
            }
        }
        "MarkDone" => {
            if x.s != Phase::S {
                return Outcome::Undefined;
            }
            match x.in_progress() {
                0 => Outcome::Undefined,
                1 => Outcome::Next("markdone_last", State { s: Phase::A, l: x.marked_done(t), last }),
                _ => Outcome::Next("markdone", State { s: Phase::S, l: x.marked_done(t), last }),
            }
        }
        other => panic!("myTodo has no action {other}"),
    }
}

/// Every state reachable from `(N, [], none)` using ids from `ids`, dropping
/// successors whose list is longer than `max_list`.
pub fn enumerate(ids: &[&str], max_list: usize) -> Enumeration {
    let init = State { s: Phase::N, l: Vec::new(), last: None };
    let mut seen: BTreeSet<State> = BTreeSet::new();
    let mut queue = VecDeque::new();
    let mut out = Enumeration::default();
    seen.insert(init.clone());
    queue.push_back(init);
    while let Some(x) = queue.pop_front() {
        let from = x.render();
        out.states.insert(from.clone());
        let mut enabled = false;
        for action in ["Add", "Remove", "MarkDone"] {
            for t in ids {
                match apply(&x, action, t) {
                    Outcome::Next(rule, next) => {
                        enabled = true;
                        if next.l.len() > max_list {
                            continue;
                        }
                        out.transitions.insert((from.clone(), format!("{action}({t})"), rule.to_string(), next.render()));
                        if seen.insert(next.clone()) {
                            queue.push_back(next);
                        }
                    }
                    Outcome::Undefined => {
                        out.undefined.insert((from.clone(), action.to_string()));
                    }
                    Outcome::Error => {
                        out.errors.insert((from.clone(), format!("{action}({t})")));
                    }
                }
            }
        }
        if !enabled {
            out.deadlocks.insert(from);
        }
    }
    out
}
