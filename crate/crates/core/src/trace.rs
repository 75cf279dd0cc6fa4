//! JSON trace files and JSON renderings of states and actions.
//!
//! ```json
//! {"model": "TrafficLight",
//!  "steps": [{"action": "timerflip", "args": {}, "expected": {"y": "Color.Red"}}]}
//! ```
//!
//! Values are written in their canonical text form. When reading, JSON
//! booleans and integers are accepted as well.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::dsl::parse_value;
use crate::model::{check_action, ActionInstance, Env, Model, ObsEnv};
use crate::session::{Trace, TraceStep};
use crate::value::TypeExpr;

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("malformed trace JSON")]
    Json(#[from] serde_json::Error),
    #[error("trace is for model {found}, not {expected}")]
    ModelMismatch { expected: String, found: String },
    #[error("step {index}: {message}")]
    Step { index: usize, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceFile {
    model: String,
    steps: Vec<StepFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StepFile {
    action: String,
    #[serde(default)]
    args: Map<String, Json>,
    #[serde(default)]
    expected: Option<Map<String, Json>>,
}

fn json_text(v: &Json) -> Result<String, String> {
    match v {
        Json::String(s) => Ok(s.clone()),
        Json::Bool(b) => Ok(b.to_string()),
        Json::Number(n) => Ok(n.to_string()),
        other => Err(format!("expected a canonical value string, found {other}")),
    }
}

/// Builds an action instance from a name and `{param: value}` arguments.
pub fn action_from_json(model: &Model, name: &str, args: &Map<String, Json>) -> Result<ActionInstance, String> {
    let sig = model.action(name).ok_or_else(|| format!("unknown action {name}"))?;
    if let Some(extra) = args.keys().find(|k| !sig.params.iter().any(|(p, _)| p == *k)) {
        return Err(format!("action {name} has no parameter {extra}"));
    }
    let mut values = Vec::with_capacity(sig.params.len());
    for (pname, pty) in &sig.params {
        let raw = args.get(pname).ok_or_else(|| format!("missing argument {pname} for {name}"))?;
        let text = json_text(raw)?;
        values.push(parse_value(&text, pty, &model.types).map_err(|e| format!("argument {pname}: {e}"))?);
    }
    let action = ActionInstance::new(name, values);
    check_action(model, &action)?;
    Ok(action)
}

/// Reads `{output: value}` into an observable, checking it against the observe clause.
pub fn observable_from_json(model: &Model, map: &Map<String, Json>) -> Result<ObsEnv, String> {
    let scope = model.state_scope();
    if let Some(extra) = map.keys().find(|k| !model.observe.iter().any(|(o, _)| o == *k)) {
        return Err(format!("model has no observable {extra}"));
    }
    let mut bindings = Vec::with_capacity(model.observe.len());
    for (name, expr) in &model.observe {
        let ty: TypeExpr = crate::expr::typecheck(expr, &scope, &model.types).map_err(|_| format!("observable {name} is ill-typed"))?;
        let raw = map.get(name).ok_or_else(|| format!("missing observable {name}"))?;
        let text = json_text(raw)?;
        bindings.push((name.clone(), parse_value(&text, &ty, &model.types).map_err(|e| format!("observable {name}: {e}"))?));
    }
    Ok(Env::new(bindings))
}

pub fn read_trace(model: &Model, text: &str) -> Result<Trace, TraceFileError> {
    let file: TraceFile = serde_json::from_str(text)?;
    if file.model != model.name {
        return Err(TraceFileError::ModelMismatch { expected: model.name.clone(), found: file.model });
    }
    let mut steps = Vec::with_capacity(file.steps.len());
    for (index, s) in file.steps.iter().enumerate() {
        let action = action_from_json(model, &s.action, &s.args).map_err(|message| TraceFileError::Step { index, message })?;
        let expected = match &s.expected {
            Some(map) => Some(observable_from_json(model, map).map_err(|message| TraceFileError::Step { index, message })?),
            None => None,
        };
        steps.push(TraceStep { action, expected });
    }
    Ok(Trace { steps })
}

/// `{name: "canonical value", ...}`
pub fn env_to_json(env: &Env) -> Json {
    Json::Object(env.bindings.iter().map(|(k, v)| (k.clone(), Json::String(v.to_string()))).collect())
}

/// `{param: "canonical value", ...}` for an instance of a declared action.
pub fn args_to_json(model: &Model, action: &ActionInstance) -> Json {
    let params = model.action(&action.name).map(|s| s.params.as_slice()).unwrap_or(&[]);
    Json::Object(
        params
            .iter()
            .zip(&action.args)
            .map(|((p, _), v)| (p.clone(), Json::String(v.to_string())))
            .collect(),
    )
}

pub fn write_trace(model: &Model, trace: &Trace) -> String {
    let file = TraceFile {
        model: model.name.clone(),
        steps: trace
            .steps
            .iter()
            .map(|s| StepFile {
                action: s.action.name.clone(),
                args: match args_to_json(model, &s.action) {
                    Json::Object(m) => m,
                    _ => Map::new(),
                },
                expected: s.expected.as_ref().map(|e| match env_to_json(e) {
                    Json::Object(m) => m,
                    _ => Map::new(),
                }),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("trace serializes");
    text.push('\n');
    text
}
