//! Running models: interactive sessions with undo, and batch trace replay.

use std::sync::Arc;

use thiserror::Error;

use crate::expr::EvalError;
use crate::model::{initial_state, observe, step, ActionInstance, Model, ObsEnv, StateEnv, StepOutcome};

/// Longest trace `replay` accepts.
pub const MAX_TRACE_STEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub action: ActionInstance,
    /// What the real system showed after this action, if recorded.
    pub expected: Option<ObsEnv>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn from_actions(actions: impl IntoIterator<Item = ActionInstance>) -> Self {
        Trace { steps: actions.into_iter().map(|action| TraceStep { action, expected: None }).collect() }
    }

    pub fn actions(&self) -> impl Iterator<Item = &ActionInstance> {
        self.steps.iter().map(|s| &s.action)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("nothing to undo")]
    EmptyHistory,
    #[error("trace has {0} steps; at most {MAX_TRACE_STEPS} are supported")]
    TraceTooLong(usize),
    #[error("initial state could not be evaluated: {0}")]
    Init(EvalError),
}

/// A live simulation of one model.
#[derive(Debug, Clone)]
pub struct Session {
    model: Arc<Model>,
    initial: StateEnv,
    current: StateEnv,
    history: Vec<(ActionInstance, StateEnv)>,
    recorded: Trace,
}

impl Session {
    pub fn new(model: Arc<Model>) -> Result<Self, SessionError> {
        let initial = initial_state(&model).map_err(SessionError::Init)?;
        Ok(Session { model, current: initial.clone(), initial, history: Vec::new(), recorded: Trace::default() })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn current(&self) -> &StateEnv {
        &self.current
    }

    pub fn observable(&self) -> Result<ObsEnv, EvalError> {
        observe(&self.model, &self.current)
    }

    pub fn recorded(&self) -> &Trace {
        &self.recorded
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// Applies `action`. The session only moves when a rule fires; an
    /// undefined transition or an evaluation error leaves it untouched.
    pub fn fire(&mut self, action: &ActionInstance) -> Result<StepOutcome, EvalError> {
        let outcome = step(&self.model, &self.current, action)?;
        if let StepOutcome::Fired { next, .. } = &outcome {
            let prior = std::mem::replace(&mut self.current, next.clone());
            self.history.push((action.clone(), prior));
            self.recorded.steps.push(TraceStep { action: action.clone(), expected: None });
            self.debug_check();
        }
        Ok(outcome)
    }

    pub fn undo(&mut self) -> Result<&StateEnv, SessionError> {
        let (_, prior) = self.history.pop().ok_or(SessionError::EmptyHistory)?;
        self.current = prior;
        self.recorded.steps.pop();
        self.debug_check();
        Ok(&self.current)
    }

    /// Back to the initial state with empty history.
    pub fn reset(&mut self) {
        self.current = self.initial.clone();
        self.history.clear();
        self.recorded = Trace::default();
    }

    /// Replaying the recorded trace from the initial state must land on `current`.
    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            let replayed = replay(&self.model, &self.recorded).expect("recorded trace within limits");
            debug_assert!(replayed.halt.is_none(), "recorded trace halted on replay");
            debug_assert_eq!(replayed.final_state, self.current, "session diverged from its recorded trace");
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayStep {
    pub action: ActionInstance,
    pub rule: String,
    pub state: StateEnv,
    pub observable: ObsEnv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HaltReason {
    Undefined,
    Error(EvalError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Halt {
    pub index: usize,
    pub reason: HaltReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayResult {
    pub initial: StateEnv,
    pub steps: Vec<ReplayStep>,
    pub halt: Option<Halt>,
    /// State after the last step that fired.
    pub final_state: StateEnv,
}

/// Folds `step` over the trace's actions from the initial state, stopping at
/// the first undefined transition or evaluation error. Expected observables
/// in the trace are ignored.
pub fn replay(model: &Model, trace: &Trace) -> Result<ReplayResult, SessionError> {
    if trace.len() > MAX_TRACE_STEPS {
        return Err(SessionError::TraceTooLong(trace.len()));
    }
    let initial = initial_state(model).map_err(SessionError::Init)?;
    let mut state = initial.clone();
    let mut steps = Vec::with_capacity(trace.len());
    let mut halt = None;
    for (index, action) in trace.actions().enumerate() {
        match step(model, &state, action) {
            Ok(StepOutcome::Fired { rule, next, observable }) => {
                state = next;
                steps.push(ReplayStep { action: action.clone(), rule, state: state.clone(), observable });
            }
            Ok(StepOutcome::Undefined) => {
                halt = Some(Halt { index, reason: HaltReason::Undefined });
                break;
            }
            Err(e) => {
                halt = Some(Halt { index, reason: HaltReason::Error(e) });
                break;
            }
        }
    }
    Ok(ReplayResult { initial, steps, halt, final_state: state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Env;
    use crate::trace::read_trace;
    use crate::value::{TypeExpr, Value};

    fn flip() -> ActionInstance {
        ActionInstance::bare("timerflip")
    }

    fn id_action(name: &str, t: &str) -> ActionInstance {
        ActionInstance::new(name, vec![Value::id(t)])
    }

    fn session(model: Model) -> Session {
        Session::new(Arc::new(model)).unwrap()
    }

    #[test]
    fn new_sessions_start_at_init() {
        assert_eq!(session(fixtures::trafficlight()).current().to_string(), "{s: Color.Black}");
        let todo = session(fixtures::mytodo());
        assert_eq!(
            *todo.current(),
            Env::new(vec![
                ("s".into(), Value::sym("Phase", "N")),
                ("l".into(), Value::empty_list(TypeExpr::Record("Todo".into()))),
                ("last".into(), Value::none()),
            ])
        );
        assert_eq!(todo.history_len(), 0);
        assert!(todo.recorded().is_empty());
    }

    #[test]
    fn sessions_are_independent() {
        let model = Arc::new(fixtures::trafficlight());
        let mut a = Session::new(model.clone()).unwrap();
        let b = Session::new(model).unwrap();
        a.fire(&flip()).unwrap();
        assert_eq!(b.current().to_string(), "{s: Color.Black}");
    }

    #[test]
    fn fire_advances_on_fired() {
        let mut s = session(fixtures::trafficlight());
        let out = s.fire(&flip()).unwrap();
        assert!(matches!(out, StepOutcome::Fired { ref rule, .. } if rule == "r4"));
        assert_eq!(s.current().to_string(), "{s: Color.Red}");
        assert_eq!(s.history_len(), 1);
        assert_eq!(s.recorded().len(), 1);
    }

    #[test]
    fn undefined_fire_leaves_session_unchanged() {
        let mut s = session(fixtures::trafficlight());
        assert_eq!(s.fire(&ActionInstance::bare("manualswitch")).unwrap(), StepOutcome::Undefined);
        assert_eq!(s.current().to_string(), "{s: Color.Black}");
        assert_eq!(s.history_len(), 0);
    }

    #[test]
    fn eval_error_leaves_session_unchanged() {
        let mut s = session(fixtures::mytodo());
        s.fire(&id_action("Add", "t1")).unwrap();
        s.fire(&id_action("Add", "t1")).unwrap();
        let before = s.current().clone();
        assert!(s.fire(&id_action("Remove", "t1")).is_err());
        assert_eq!(*s.current(), before);
        assert_eq!(s.history_len(), 2);
    }

    #[test]
    fn mytodo_markdone_keeps_some_in_progress() {
        let mut s = session(fixtures::mytodo());
        for a in [id_action("Add", "t1"), id_action("Add", "t2"), id_action("MarkDone", "t1")] {
            assert!(s.fire(&a).unwrap().is_fired());
        }
        assert_eq!(
            s.current().to_string(),
            "{s: Phase.S, l: [{id: t1, status: Status.done}, {id: t2, status: Status.notdone}], last: t1}"
        );
    }

    #[test]
    fn undo_restores_prior_state() {
        let mut s = session(fixtures::trafficlight());
        s.fire(&flip()).unwrap();
        assert_eq!(s.undo().unwrap().to_string(), "{s: Color.Black}");
        assert!(s.recorded().is_empty());
        assert_eq!(s.undo().unwrap_err(), SessionError::EmptyHistory);
    }

    #[test]
    fn reset_clears_history() {
        let mut s = session(fixtures::trafficlight());
        s.fire(&flip()).unwrap();
        s.fire(&flip()).unwrap();
        s.reset();
        assert_eq!(s.current().to_string(), "{s: Color.Black}");
        assert_eq!(s.history_len(), 0);
        assert!(s.recorded().is_empty());
    }

    #[test]
    fn replay_of_four_flips() {
        let r = replay(&fixtures::trafficlight(), &Trace::from_actions(vec![flip(); 4])).unwrap();
        let ys: Vec<String> = r.steps.iter().map(|s| s.observable.get("y").unwrap().to_string()).collect();
        assert_eq!(ys, ["Color.Red", "Color.Yellow", "Color.Green", "Color.Red"]);
        assert!(r.halt.is_none());
    }

    #[test]
    fn replay_halts_on_undefined() {
        let r = replay(&fixtures::trafficlight(), &Trace::from_actions([ActionInstance::bare("manualswitch"), flip()])).unwrap();
        assert_eq!(r.halt, Some(Halt { index: 0, reason: HaltReason::Undefined }));
        assert!(r.steps.is_empty());
        assert_eq!(r.final_state, r.initial);
    }

    #[test]
    fn replay_of_empty_trace_is_init() {
        let r = replay(&fixtures::trafficlight(), &Trace::default()).unwrap();
        assert!(r.steps.is_empty() && r.halt.is_none());
        assert_eq!(r.final_state.to_string(), "{s: Color.Black}");
    }

    #[test]
    fn replay_refuses_huge_traces() {
        let trace = Trace::from_actions(vec![flip(); MAX_TRACE_STEPS + 1]);
        assert_eq!(replay(&fixtures::trafficlight(), &trace).unwrap_err(), SessionError::TraceTooLong(MAX_TRACE_STEPS + 1));
    }

    #[test]
    fn mytodo_golden_trace() {
        let m = fixtures::mytodo();
        let trace = read_trace(&m, fixtures::MYTODO_GOLDEN_TRACE).unwrap();
        let r = replay(&m, &trace).unwrap();
        assert!(r.halt.is_none());
        let rules: Vec<&str> = r.steps.iter().map(|s| s.rule.as_str()).collect();
        assert_eq!(
            rules,
            ["add", "add", "markdone", "markdone_last", "remove", "remove_last", "add", "add", "markdone", "remove_alldone"]
        );
        let phases: Vec<String> = r.steps.iter().map(|s| s.state.get("s").unwrap().to_string()).collect();
        assert_eq!(
            phases,
            ["Phase.S", "Phase.S", "Phase.S", "Phase.A", "Phase.S", "Phase.N", "Phase.S", "Phase.S", "Phase.S", "Phase.A"]
        );
        for (step, expected) in r.steps.iter().zip(&trace.steps) {
            assert_eq!(Some(&step.observable), expected.expected.as_ref());
        }
        assert_eq!(r.final_state.to_string(), "{s: Phase.A, l: [{id: t2, status: Status.done}], last: t1}");
    }
}
