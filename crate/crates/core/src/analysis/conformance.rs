use super::AnalysisError;
use crate::expr::EvalError;
use crate::model::{initial_state, step, Model, ObsEnv, StateEnv, StepOutcome};
use crate::session::{SessionError, Trace, MAX_TRACE_STEPS};
use crate::value::Value;

/// How list-valued observables are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ListOrder {
    /// Lists whose elements carry an `id` field compare as multisets.
    #[default]
    IdKeyed,
    /// Lists compare element by element.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceStatus {
    Conformant,
    Diverged,
    ModelUndefined,
    /// A guard or update failed to evaluate during replay.
    ModelError,
}

impl DivergenceStatus {
    pub fn name(self) -> &'static str {
        match self {
            DivergenceStatus::Conformant => "conformant",
            DivergenceStatus::Diverged => "diverged",
            DivergenceStatus::ModelUndefined => "modelUndefined",
            DivergenceStatus::ModelError => "modelError",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceReport {
    pub status: DivergenceStatus,
    pub step_index: Option<usize>,
    pub expected: Option<ObsEnv>,
    pub actual: Option<ObsEnv>,
    /// Post-state for a divergence; pre-state when the model could not step.
    pub state_at_divergence: Option<StateEnv>,
    pub fired_rule: Option<String>,
    pub error: Option<EvalError>,
}

impl DivergenceReport {
    fn conformant() -> Self {
        DivergenceReport {
            status: DivergenceStatus::Conformant,
            step_index: None,
            expected: None,
            actual: None,
            state_at_divergence: None,
            fired_rule: None,
            error: None,
        }
    }

    pub fn is_conformant(&self) -> bool {
        self.status == DivergenceStatus::Conformant
    }
}

fn is_id_keyed(items: &[Value]) -> bool {
    items.iter().all(|v| matches!(v, Value::Record { .. }) && v.field("id").is_some())
}

fn values_match(expected: &Value, actual: &Value, order: ListOrder) -> bool {
    match (expected, actual) {
        (Value::List { items: a, .. }, Value::List { items: b, .. })
            if order == ListOrder::IdKeyed && is_id_keyed(a) && is_id_keyed(b) =>
        {
            let mut a: Vec<&Value> = a.iter().collect();
            let mut b: Vec<&Value> = b.iter().collect();
            a.sort();
            b.sort();
            a == b
        }
        _ => expected == actual,
    }
}

/// Observable equality, with list order ignored for id-keyed lists under
/// [`ListOrder::IdKeyed`].
pub fn observables_match(expected: &ObsEnv, actual: &ObsEnv, order: ListOrder) -> bool {
    expected.bindings.len() == actual.bindings.len()
        && expected
            .bindings
            .iter()
            .zip(&actual.bindings)
            .all(|((n1, v1), (n2, v2))| n1 == n2 && values_match(v1, v2, order))
}

/// Replays the trace and compares each step's observable with what the real
/// system showed. Every step must carry an expectation.
pub fn check_conformance(model: &Model, observed: &Trace, order: ListOrder) -> Result<DivergenceReport, AnalysisError> {
    if observed.len() > MAX_TRACE_STEPS {
        return Err(SessionError::TraceTooLong(observed.len()).into());
    }
    if let Some(i) = observed.steps.iter().position(|s| s.expected.is_none()) {
        return Err(AnalysisError::MissingExpectation(i));
    }
    let mut state = initial_state(model).map_err(SessionError::Init)?;
    for (index, s) in observed.steps.iter().enumerate() {
        let expected = s.expected.clone().expect("checked above");
        match step(model, &state, &s.action) {
            Ok(StepOutcome::Fired { rule, next, observable }) => {
                if !observables_match(&expected, &observable, order) {
                    return Ok(DivergenceReport {
                        status: DivergenceStatus::Diverged,
                        step_index: Some(index),
                        expected: Some(expected),
                        actual: Some(observable),
                        state_at_divergence: Some(next),
                        fired_rule: Some(rule),
                        error: None,
                    });
                }
                state = next;
            }
            Ok(StepOutcome::Undefined) => {
                return Ok(DivergenceReport {
                    status: DivergenceStatus::ModelUndefined,
                    step_index: Some(index),
                    expected: Some(expected),
                    actual: None,
                    state_at_divergence: Some(state),
                    fired_rule: None,
                    error: None,
                })
            }
            Err(e) => {
                return Ok(DivergenceReport {
                    status: DivergenceStatus::ModelError,
                    step_index: Some(index),
                    expected: Some(expected),
                    actual: None,
                    state_at_divergence: Some(state),
                    fired_rule: None,
                    error: Some(e),
                })
            }
        }
    }
    Ok(DivergenceReport::conformant())
}
