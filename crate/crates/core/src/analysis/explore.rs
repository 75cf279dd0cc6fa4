use std::collections::{HashMap, HashSet, VecDeque};

use super::{fingerprint, AnalysisError, Universe};
use crate::expr::{eval_bool, EvalError, Layered};
use crate::model::{initial_state, instances, step, ActionInstance, Model, StateEnv, StepOutcome};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploredState {
    /// Canonical rendering; the state's identity.
    pub key: String,
    pub env: StateEnv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub action: ActionInstance,
    pub rule: String,
    pub to: usize,
}

/// A state where some instance of `action` matched no rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndefinedPair {
    pub state: usize,
    pub action: String,
}

/// Two rules for the same action whose guards both held on an explored state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overlap {
    pub first: String,
    pub second: String,
    pub state: usize,
    pub action: ActionInstance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantViolation {
    pub invariant: String,
    pub state: usize,
    /// Actions leading from the initial state to the witness.
    pub path: Vec<ActionInstance>,
}

/// A guard, update or invariant that failed to evaluate during exploration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalFailure {
    pub state: usize,
    pub action: Option<ActionInstance>,
    pub invariant: Option<String>,
    pub error: EvalError,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationResult {
    pub model_name: String,
    pub fingerprint: String,
    pub universe: Universe,
    /// Parameter names of each action, for rendering instances.
    pub action_params: Vec<(String, Vec<String>)>,
    /// Discovery order; index 0 is the initial state.
    pub states: Vec<ExploredState>,
    pub transitions: Vec<Transition>,
    /// The state bound stopped admitting new states.
    pub frontier_truncated: bool,
    /// Successors dropped because a list exceeded the universe's length bound.
    pub list_bound_pruned: usize,
    pub undefined: Vec<UndefinedPair>,
    pub deadlocks: Vec<usize>,
    pub invariant_violations: Vec<InvariantViolation>,
    pub overlaps: Vec<Overlap>,
    pub eval_failures: Vec<EvalFailure>,
}

impl ExplorationResult {
    pub fn initial(&self) -> &ExploredState {
        &self.states[0]
    }

    /// Canonical keys of all states, sorted.
    pub fn state_keys(&self) -> Vec<String> {
        let mut keys: Vec<String> = self.states.iter().map(|s| s.key.clone()).collect();
        keys.sort();
        keys
    }

    /// `(from key, action, rule, to key)` for every transition, sorted.
    pub fn transition_keys(&self) -> Vec<(String, String, String, String)> {
        let mut out: Vec<_> = self
            .transitions
            .iter()
            .map(|t| {
                (self.states[t.from].key.clone(), t.action.to_string(), t.rule.clone(), self.states[t.to].key.clone())
            })
            .collect();
        out.sort();
        out
    }
}

fn exceeds_list_bound(state: &StateEnv, bound: usize) -> bool {
    state.values().any(|v| matches!(v, Value::List { items, .. } if items.len() > bound))
}

/// Breadth-first closure of the transition function from the initial state
/// over every action instance the universe can build.
///
/// At most `max_states` states are admitted; once the bound is hit, further
/// new successors are dropped (and their transitions with them) while the
/// admitted states are still expanded.
pub fn explore(model: &Model, universe: &Universe, max_states: usize) -> Result<ExplorationResult, AnalysisError> {
    universe.check(model)?;
    if max_states == 0 {
        return Err(AnalysisError::UniverseMismatch("state bound must be positive".into()));
    }
    let init = initial_state(model).map_err(|e| AnalysisError::Session(crate::session::SessionError::Init(e)))?;

    let all_instances: Vec<ActionInstance> =
        model.actions.iter().flat_map(|sig| instances(model, sig, universe)).collect();

    let mut result = ExplorationResult {
        model_name: model.name.clone(),
        fingerprint: fingerprint(model),
        universe: universe.clone(),
        action_params: model
            .actions
            .iter()
            .map(|a| (a.name.clone(), a.params.iter().map(|(p, _)| p.clone()).collect()))
            .collect(),
        states: Vec::new(),
        transitions: Vec::new(),
        frontier_truncated: false,
        list_bound_pruned: 0,
        undefined: Vec::new(),
        deadlocks: Vec::new(),
        invariant_violations: Vec::new(),
        overlaps: Vec::new(),
        eval_failures: Vec::new(),
    };
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut parent: Vec<Option<(usize, ActionInstance)>> = Vec::new();
    let mut queue = VecDeque::new();
    let mut overlap_pairs: HashSet<(String, String)> = HashSet::new();

    let init_key = init.canonical();
    index.insert(init_key.clone(), 0);
    result.states.push(ExploredState { key: init_key, env: init });
    parent.push(None);
    check_invariants(model, 0, &mut result, &parent);
    queue.push_back(0);

    while let Some(current) = queue.pop_front() {
        let state = result.states[current].env.clone();
        let mut any_enabled = false;
        let mut undefined_here: HashSet<&str> = HashSet::new();

        for inst in &all_instances {
            record_overlaps(model, current, &state, inst, &mut overlap_pairs, &mut result.overlaps);
            match step(model, &state, inst) {
                Ok(StepOutcome::Fired { rule, next, .. }) => {
                    any_enabled = true;
                    if exceeds_list_bound(&next, universe.max_list_len) {
                        result.list_bound_pruned += 1;
                        continue;
                    }
                    let key = next.canonical();
                    let to = match index.get(&key) {
                        Some(&i) => i,
                        None => {
                            if result.states.len() >= max_states {
                                result.frontier_truncated = true;
                                continue;
                            }
                            let i = result.states.len();
                            index.insert(key.clone(), i);
                            result.states.push(ExploredState { key, env: next });
                            parent.push(Some((current, inst.clone())));
                            check_invariants(model, i, &mut result, &parent);
                            queue.push_back(i);
                            i
                        }
                    };
                    result.transitions.push(Transition { from: current, action: inst.clone(), rule, to });
                }
                Ok(StepOutcome::Undefined) => {
                    if undefined_here.insert(&inst.name) {
                        result.undefined.push(UndefinedPair { state: current, action: inst.name.clone() });
                    }
                }
                Err(error) => result.eval_failures.push(EvalFailure {
                    state: current,
                    action: Some(inst.clone()),
                    invariant: None,
                    error,
                }),
            }
        }
        if !any_enabled {
            result.deadlocks.push(current);
        }
    }
    Ok(result)
}

fn path_to(parent: &[Option<(usize, ActionInstance)>], mut state: usize) -> Vec<ActionInstance> {
    let mut path = Vec::new();
    while let Some((prev, action)) = &parent[state] {
        path.push(action.clone());
        state = *prev;
    }
    path.reverse();
    path
}

fn check_invariants(model: &Model, state: usize, result: &mut ExplorationResult, parent: &[Option<(usize, ActionInstance)>]) {
    for (name, expr) in &model.invariants {
        match eval_bool(expr, &result.states[state].env) {
            Ok(true) => {}
            Ok(false) => result.invariant_violations.push(InvariantViolation {
                invariant: name.clone(),
                state,
                path: path_to(parent, state),
            }),
            Err(error) => result.eval_failures.push(EvalFailure { state, action: None, invariant: Some(name.clone()), error }),
        }
    }
}

/// Records every pair of rules for `inst`'s action whose guards both hold.
/// A guard that fails to evaluate counts as not holding.
fn record_overlaps(
    model: &Model,
    state_idx: usize,
    state: &StateEnv,
    inst: &ActionInstance,
    seen: &mut HashSet<(String, String)>,
    out: &mut Vec<Overlap>,
) {
    let Some(sig) = model.action(&inst.name) else { return };
    let params: Vec<(String, Value)> = sig.params.iter().map(|(n, _)| n.clone()).zip(inst.args.iter().cloned()).collect();
    let env = Layered(params.as_slice(), state);
    let holding: Vec<&str> = model
        .rules
        .iter()
        .filter(|r| r.action == inst.name)
        .filter(|r| eval_bool(&r.guard, &env).unwrap_or(false))
        .map(|r| r.label.as_str())
        .collect();
    for (i, first) in holding.iter().enumerate() {
        for second in &holding[i + 1..] {
            if seen.insert((first.to_string(), second.to_string())) {
                out.push(Overlap {
                    first: first.to_string(),
                    second: second.to_string(),
                    state: state_idx,
                    action: inst.clone(),
                });
            }
        }
    }
}
