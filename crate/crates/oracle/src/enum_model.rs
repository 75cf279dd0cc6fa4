//! Models whose state variables are all enums and whose actions take no
//! parameters. Guards are conjunctions of equality tests; updates assign a
//! member or copy another variable. Small enough to enumerate by brute force,
//! rich enough to exercise first-match ordering and simultaneous updates.

use std::collections::{BTreeSet, VecDeque};

use crate::Enumeration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// `var == Enum.member`
    Is(usize, usize),
    /// `var != Enum.member`
    IsNot(usize, usize),
    /// `var == other` for two variables of the same enum.
    Same(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Member(usize),
    Var(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub action: usize,
    pub guard: Vec<Atom>,
    pub updates: Vec<(usize, Rhs)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumModel {
    /// Members of each enum. Enum `i` is named `E{i}`, its members `m{j}`.
    pub enums: Vec<usize>,
    /// Enum of each variable. Variable `i` is named `v{i}`.
    pub vars: Vec<usize>,
    /// Initial member of each variable.
    pub init: Vec<usize>,
    /// Number of actions. Action `i` is named `a{i}`.
    pub actions: usize,
    /// Rule `i` is labelled `r{i}`.
    pub rules: Vec<Rule>,
}

impl EnumModel {
    fn member(&self, var: usize, m: usize) -> String {
        format!("E{}.m{m}", self.vars[var])
    }

    fn atom_text(&self, a: &Atom) -> String {
        match a {
            Atom::Is(v, m) => format!("v{v} == {}", self.member(*v, *m)),
            Atom::IsNot(v, m) => format!("v{v} != {}", self.member(*v, *m)),
            Atom::Same(v, w) => format!("v{v} == v{w}"),
        }
    }

    /// The model in `.tsm` syntax.
    pub fn source(&self) -> String {
        let mut out = String::from("model Fuzzed\n");
        for (i, n) in self.enums.iter().enumerate() {
            let members: Vec<String> = (0..*n).map(|j| format!("m{j}")).collect();
            out.push_str(&format!("enum E{i} {{ {} }}\n", members.join(", ")));
        }
        for (i, e) in self.vars.iter().enumerate() {
            out.push_str(&format!("var v{i}: E{e}\n"));
        }
        for (i, m) in self.init.iter().enumerate() {
            out.push_str(&format!("init v{i} := {}\n", self.member(i, *m)));
        }
        for a in 0..self.actions {
            out.push_str(&format!("action a{a}\n"));
        }
        let outputs: Vec<String> = (0..self.vars.len()).map(|i| format!("o{i}: v{i}")).collect();
        out.push_str(&format!("observe ({})\n", outputs.join(", ")));
        for (i, r) in self.rules.iter().enumerate() {
            out.push_str(&format!("rule r{i}: on a{}", r.action));
            if !r.guard.is_empty() {
                let atoms: Vec<String> = r.guard.iter().map(|a| self.atom_text(a)).collect();
                out.push_str(&format!(" when {}", atoms.join(" and ")));
            }
            let updates: Vec<String> = r
                .updates
                .iter()
                .map(|(v, rhs)| match rhs {
                    Rhs::Member(m) => format!("v{v} := {}", self.member(*v, *m)),
                    Rhs::Var(w) => format!("v{v} := v{w}"),
                })
                .collect();
            out.push_str(&format!(" => {}\n", updates.join(", ")));
        }
        out
    }

    fn render(&self, x: &[usize]) -> String {
        let parts: Vec<String> = x.iter().enumerate().map(|(i, m)| format!("v{i}: {}", self.member(i, *m))).collect();
        format!("{{{}}}", parts.join(", "))
    }

    fn holds(&self, a: &Atom, x: &[usize]) -> bool {
        match a {
            Atom::Is(v, m) => x[*v] == *m,
            Atom::IsNot(v, m) => x[*v] != *m,
            Atom::Same(v, w) => x[*v] == x[*w],
        }
    }

    /// Breadth-first enumeration of the reachable states.
    pub fn enumerate(&self) -> Enumeration {
        let mut out = Enumeration::default();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.init.clone());
        queue.push_back(self.init.clone());
        while let Some(x) = queue.pop_front() {
            let from = self.render(&x);
            out.states.insert(from.clone());
            let mut enabled = false;
            for a in 0..self.actions {
                let fired = self
                    .rules
                    .iter()
                    .enumerate()
                    .find(|(_, r)| r.action == a && r.guard.iter().all(|atom| self.holds(atom, &x)));
                match fired {
                    Some((i, r)) => {
                        enabled = true;
                        let mut next = x.clone();
                        for (v, rhs) in &r.updates {
                            next[*v] = match rhs {
                                Rhs::Member(m) => *m,
                                Rhs::Var(w) => x[*w],
                            };
                        }
                        out.transitions.insert((from.clone(), format!("a{a}"), format!("r{i}"), self.render(&next)));
                        if seen.insert(next.clone()) {
                            queue.push_back(next);
                        }
                    }
                    None => {
                        out.undefined.insert((from.clone(), format!("a{a}")));
                    }
                }
            }
            if !enabled {
                out.deadlocks.insert(from);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two swapped variables: the classic simultaneous-assignment check.
    #[test]
    fn swap_uses_pre_state() {
        let m = EnumModel {
            enums: vec![2],
            vars: vec![0, 0],
            init: vec![0, 1],
            actions: 1,
            rules: vec![Rule { action: 0, guard: vec![], updates: vec![(0, Rhs::Var(1)), (1, Rhs::Var(0))] }],
        };
        let e = m.enumerate();
        assert_eq!(e.states.len(), 2);
        assert!(e.states.contains("{v0: E0.m1, v1: E0.m0}"));
        assert!(m.source().contains("rule r0: on a0 => v0 := v1, v1 := v0"));
    }
}
