//! JSON and text renderings shared by the commands and the HTTP API.

use serde_json::{json, Value as Json};
use tsm_core::analysis::{DivergenceReport, ExplorationResult};
use tsm_core::trace::{args_to_json, env_to_json};
use tsm_core::{ActionInstance, Diagnostic, Env, Model};

pub fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

pub fn action_json(model: &Model, action: &ActionInstance) -> Json {
    json!({"action": action.name, "args": args_to_json(model, action)})
}

/// `{"name": "canonical value", ...}` for a state or observable.
pub fn env_json(env: &Env) -> Json {
    env_to_json(env)
}

pub fn diagnostics_json(diags: &[Diagnostic]) -> Json {
    serde_json::to_value(diags).expect("diagnostics serialize")
}

/// Name, variables, actions, rules and observables of a model.
pub fn model_summary(model: &Model) -> Json {
    let state_vars: Vec<Json> =
        model.state_vars.iter().map(|(n, t)| json!({"name": n, "type": t.to_string()})).collect();
    let actions: Vec<Json> = model
        .actions
        .iter()
        .map(|a| {
            let params: Vec<Json> = a.params.iter().map(|(p, t)| json!({"name": p, "type": t.to_string()})).collect();
            json!({"name": a.name, "params": params})
        })
        .collect();
    let rules: Vec<Json> = model
        .rules
        .iter()
        .map(|r| json!({"label": r.label, "action": r.action, "guard": r.guard.to_string(), "implLink": r.impl_link}))
        .collect();
    let observe: Vec<&str> = model.observe.iter().map(|(n, _)| n.as_str()).collect();
    json!({
        "name": model.name,
        "stateVars": state_vars,
        "actions": actions,
        "rules": rules,
        "observeOutputs": observe,
    })
}

pub fn exploration_json(model: &Model, e: &ExplorationResult) -> Json {
    let key = |i: usize| e.states[i].key.clone();
    json!({
        "model": e.model_name,
        "states": e.states.len(),
        "transitions": e.transitions.len(),
        "undefinedPairs": e.undefined.iter().map(|u| json!({"state": key(u.state), "action": u.action})).collect::<Vec<_>>(),
        "deadlocks": e.deadlocks.iter().map(|&d| key(d)).collect::<Vec<_>>(),
        "truncated": e.frontier_truncated,
        "listBoundPruned": e.list_bound_pruned,
        "overlaps": e.overlaps.iter().map(|o| json!({
            "first": o.first,
            "second": o.second,
            "state": key(o.state),
            "action": action_json(model, &o.action),
        })).collect::<Vec<_>>(),
        "invariantViolations": e.invariant_violations.iter().map(|v| json!({
            "invariant": v.invariant,
            "state": key(v.state),
            "path": v.path.iter().map(|a| action_json(model, a)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "evalFailures": e.eval_failures.iter().map(|f| json!({
            "state": key(f.state),
            "action": f.action.as_ref().map(|a| action_json(model, a)),
            "invariant": f.invariant,
            "error": f.error.to_string(),
        })).collect::<Vec<_>>(),
    })
}

pub fn divergence_json(model: &Model, actions: &[ActionInstance], r: &DivergenceReport) -> Json {
    json!({
        "status": r.status.name(),
        "stepIndex": r.step_index,
        "action": r.step_index.map(|i| action_json(model, &actions[i])),
        "expected": r.expected.as_ref().map(env_json),
        "actual": r.actual.as_ref().map(env_json),
        "stateAtDivergence": r.state_at_divergence.as_ref().map(env_json),
        "firedRule": r.fired_rule,
        "error": r.error.as_ref().map(|e| e.to_string()),
    })
}
