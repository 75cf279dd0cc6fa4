//! Property tests over generated expressions, models and action sequences.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use tsm_core::analysis::{check_conformance, diff_models, DivergenceStatus, ListOrder};
use tsm_core::dsl::{is_keyword, parse_expr};
use tsm_core::expr::{eval, typecheck, TypeScope};
use tsm_core::model::{enabled_actions, initial_state, step};
use tsm_core::{
    fixtures, format_model, parse, replay, ActionInstance, EvalErrorKind, Model, Session, StepOutcome, Trace,
    TraceStep, TypeExpr, Universe, Value,
};

#[path = "support/gen.rs"]
mod gen;

use gen::{model_source, typed, HEADER};

fn scope() -> TypeScope {
    [
        ("n", TypeExpr::Int),
        ("b", TypeExpr::Bool),
        ("p", TypeExpr::Enum("Status".into())),
        ("t", TypeExpr::Id),
        ("last", TypeExpr::Id),
        ("l", TypeExpr::list_of(TypeExpr::Record("Todo".into()))),
    ]
    .into_iter()
    .map(|(n, t)| (n.to_string(), t))
    .collect()
}

fn decls_model() -> Model {
    parse(&format!("model D\n{HEADER}var x: int\ninit x := 0\naction go\nobserve (o: x)\nrule r: on go => x := x\n"))
        .unwrap()
}

fn todo(id: &str, status: &str) -> Value {
    Value::Record {
        name: "Todo".into(),
        fields: vec![("id".into(), Value::id(id)), ("status".into(), Value::sym("Status", status))],
    }
}

fn todo_list() -> impl Strategy<Value = Value> {
    prop::collection::vec(
        (prop::sample::select(vec!["t1", "t2", "t3"]), prop::sample::select(vec!["notdone", "done", "delayed"])),
        0..4,
    )
    .prop_map(|items| Value::List {
        elem: TypeExpr::Record("Todo".into()),
        items: items.into_iter().map(|(i, s)| todo(i, s)).collect(),
    })
}

fn env() -> impl Strategy<Value = Vec<(String, Value)>> {
    (
        -3i64..4,
        any::<bool>(),
        prop::sample::select(vec!["notdone", "done", "delayed"]),
        prop::sample::select(vec!["t1", "t2", "t3", "none"]),
        prop::sample::select(vec!["t1", "t2", "none"]),
        todo_list(),
    )
        .prop_map(|(n, b, p, t, last, l)| {
            let id = |s: &str| if s == "none" { Value::none() } else { Value::id(s) };
            vec![
                ("n".into(), Value::Int(n)),
                ("b".into(), Value::Bool(b)),
                ("p".into(), Value::sym("Status", p)),
                ("t".into(), id(t)),
                ("last".into(), id(last)),
                ("l".into(), l),
            ]
        })
}

fn any_typed() -> impl Strategy<Value = (String, TypeExpr)> {
    let t = typed();
    prop_oneof![
        t.int.prop_map(|s| (s, TypeExpr::Int)),
        t.bool_.prop_map(|s| (s, TypeExpr::Bool)),
        t.status.prop_map(|s| (s, TypeExpr::Enum("Status".into()))),
        t.list.prop_map(|s| (s, TypeExpr::list_of(TypeExpr::Record("Todo".into())))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    /// Well-typed expressions never hit a runtime type mismatch, evaluate to
    /// a value of their static type, and evaluate the same way twice.
    #[test]
    fn well_typed_expressions_evaluate_soundly((src, ty) in any_typed(), env in env()) {
        let m = decls_model();
        let expr = parse_expr(&src, &scope(), &m.types).map_err(|d| TestCaseError::fail(format!("{src}: {d:?}")))?;
        prop_assert_eq!(typecheck(&expr, &scope(), &m.types).unwrap(), ty.clone());
        let before = env.clone();
        let first = eval(&expr, &env);
        prop_assert_eq!(&env, &before);
        prop_assert_eq!(&first, &eval(&expr, &env));
        match first {
            Ok(v) => prop_assert!(m.types.conforms(&v, &ty), "{} gave {}", src, v),
            Err(e) => prop_assert_ne!(e.kind, EvalErrorKind::TypeMismatchAtRuntime, "{}", src),
        }
    }
}

fn eval_src(src: &str, env: &[(String, Value)]) -> Value {
    let m = decls_model();
    eval(&parse_expr(src, &scope(), &m.types).unwrap(), &env.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn list_operations_obey_their_laws(env in env()) {
        let int = |s: &str| eval_src(s, &env).as_int().unwrap();
        let truth = |s: &str| eval_src(s, &env) == Value::Bool(true);
        prop_assert_eq!(int("len(add(l, {id: t, status: Status.done}))"), int("len(l)") + 1);
        for p in [".status == Status.done", ".id == t", "true"] {
            prop_assert_eq!(int(&format!("count(l where {p})")) + int(&format!("count(l where not ({p}))")), int("len(l)"));
            prop_assert_eq!(int(&format!("len(remove(l where {p}))")), int(&format!("count(l where not ({p}))")));
            prop_assert_eq!(int(&format!("len(update(l where {p} set status := Status.done))")), int("len(l)"));
            prop_assert_eq!(truth(&format!("exists(l where {p})")), int(&format!("count(l where {p})")) > 0);
        }
        let added = "contains(add(l, {id: t, status: Status.delayed}), t)";
        prop_assert!(truth(added));
        prop_assert!(!truth("contains(remove(l where .id == t), t)"));
        prop_assert_eq!(
            eval_src("remove(add(l, {id: t, status: Status.done}) where .id == t)", &env),
            eval_src("remove(l where .id == t)", &env)
        );
        prop_assert_eq!(int("count(update(l where true set status := Status.done) where .status != Status.done)"), 0);
    }
}

// ---------------------------------------------------------------------------
// Generated models

fn act(name: &str, id: &str) -> ActionInstance {
    ActionInstance::new(name, vec![Value::id(id)])
}

fn actions() -> impl Strategy<Value = Vec<ActionInstance>> {
    prop::collection::vec(
        (prop::sample::select(vec!["Go", "Stop"]), prop::sample::select(vec!["t1", "t2"])).prop_map(|(a, t)| act(a, t)),
        0..20,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn format_then_parse_is_a_fixpoint(src in model_source()) {
        let m = parse(&src).map_err(|d| TestCaseError::fail(format!("{src}\n{d:?}")))?;
        let text = format_model(&m);
        let again = parse(&text).map_err(|d| TestCaseError::fail(format!("{text}\n{d:?}")))?;
        prop_assert_eq!(&again, &m);
        prop_assert_eq!(format_model(&again), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Stepping is deterministic, leaves variables the rule does not assign
    /// alone, and keeps every variable within its declared type.
    #[test]
    fn steps_are_deterministic_framed_and_typed(src in model_source(), seq in actions()) {
        let m = parse(&src).unwrap();
        let mut state = initial_state(&m).unwrap();
        for a in &seq {
            let out = step(&m, &state, a);
            prop_assert_eq!(&out, &step(&m, &state, a));
            match out {
                Ok(StepOutcome::Fired { rule, next, .. }) => {
                    let rule = m.rule(&rule).unwrap();
                    for (name, ty) in &m.state_vars {
                        let v = next.get(name).unwrap();
                        prop_assert!(m.types.conforms(v, ty), "{} = {}", name, v);
                        if !rule.updates.iter().any(|(u, _)| u == name) {
                            prop_assert_eq!(Some(v), state.get(name));
                        }
                    }
                    state = next;
                }
                Ok(StepOutcome::Undefined) => {}
                Err(e) => prop_assert_ne!(e.kind, EvalErrorKind::TypeMismatchAtRuntime),
            }
        }
    }

    #[test]
    fn diff_is_empty_on_identity_and_anti_symmetric(a in model_source(), b in model_source()) {
        let (a, b) = (parse(&a).unwrap(), parse(&b).unwrap());
        prop_assert!(diff_models(&a, &a).is_empty());
        let (ab, ba) = (diff_models(&a, &b), diff_models(&b, &a));
        prop_assert_eq!(&ab.rules.added, &ba.rules.removed);
        prop_assert_eq!(&ab.rules.removed, &ba.rules.added);
        prop_assert_eq!(ab.rules.changed.len(), ba.rules.changed.len());
        prop_assert_eq!(&ab.state_vars.added, &ba.state_vars.removed);
        prop_assert_eq!(&ab.actions.added, &ba.actions.removed);
        prop_assert_eq!(&ab.invariants.added, &ba.invariants.removed);
        prop_assert_eq!(&ab.meta.added, &ba.meta.removed);
        prop_assert_eq!(ab.is_empty(), ba.is_empty());
    }
}

// ---------------------------------------------------------------------------
// Parser robustness

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn arbitrary_input_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        if let Err(diags) = parse(&text) {
            prop_assert!(!diags.is_empty());
        }
    }

    #[test]
    fn mutated_fixtures_never_panic(
        which in 0usize..3,
        edits in prop::collection::vec((any::<prop::sample::Index>(), prop::option::of(any::<char>())), 1..6),
    ) {
        let mut chars: Vec<char> = [fixtures::TRAFFICLIGHT, fixtures::MYTODO, fixtures::MYTODO_EXPIRE][which].chars().collect();
        for (at, c) in edits {
            let i = at.index(chars.len());
            match c {
                Some(c) => chars.insert(i, c),
                None => { chars.remove(i); }
            }
        }
        let text: String = chars.into_iter().collect();
        if let Err(diags) = parse(&text) {
            prop_assert!(!diags.is_empty());
        }
    }

    /// Renaming the action of one rule to an undeclared name is reported
    /// exactly at the new name.
    #[test]
    fn unknown_action_spans_are_exact(which in 0usize..2, pick in any::<prop::sample::Index>(), name in "[a-z][a-z0-9_]{0,10}") {
        let src = [fixtures::TRAFFICLIGHT, fixtures::MYTODO][which];
        let declared = ["timerflip", "manualswitch", "Add", "Remove", "MarkDone"];
        prop_assume!(!declared.contains(&name.as_str()) && !is_keyword(&name));
        let lines: Vec<&str> = src.lines().collect();
        let rule_lines: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].starts_with("rule ")).collect();
        let line = rule_lines[pick.index(rule_lines.len())];
        let on = lines[line].find(" on ").unwrap() + 4;
        let old_len = lines[line][on..].find(|c: char| !c.is_alphanumeric() && c != '_').unwrap_or(lines[line].len() - on);
        let mut edited: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        edited[line].replace_range(on..on + old_len, &name);
        let diags = parse(&(edited.join("\n") + "\n")).unwrap_err();
        let d = diags.iter().find(|d| d.message == format!("unknown action {name}")).expect("reported");
        prop_assert_eq!(d.span.start_line as usize, line + 1);
        prop_assert_eq!(d.span.start_col as usize, on + 1);
        prop_assert_eq!(d.span.end_line as usize, line + 1);
        prop_assert_eq!(d.span.end_col as usize, on + 1 + name.len());
    }
}

/// Feeds random bytes and mutated fixtures to the parser for a minute.
/// Run with `cargo test --release -- --ignored parser_survives_a_minute`.
#[test]
#[ignore]
fn parser_survives_a_minute_of_fuzzing() {
    use proptest::test_runner::{Config, TestRunner};
    use std::time::{Duration, Instant};

    let deadline = Instant::now() + Duration::from_secs(60);
    let sources = [fixtures::TRAFFICLIGHT, fixtures::MYTODO, fixtures::MYTODO_EXPIRE];
    let input = prop_oneof![
        prop::collection::vec(any::<u8>(), 0..400).prop_map(|b| String::from_utf8_lossy(&b).into_owned()),
        (0usize..3, prop::collection::vec((any::<prop::sample::Index>(), prop::option::of(any::<char>())), 1..8))
            .prop_map(move |(which, edits)| {
                let mut chars: Vec<char> = sources[which].chars().collect();
                for (at, c) in edits {
                    let i = at.index(chars.len());
                    match c {
                        Some(c) => chars.insert(i, c),
                        None => {
                            chars.remove(i);
                        }
                    }
                }
                chars.into_iter().collect()
            }),
    ];
    let mut runs = 0u64;
    while Instant::now() < deadline {
        let mut runner = TestRunner::new(Config { cases: 1_000, failure_persistence: None, ..Config::default() });
        runner
            .run(&input, |text| {
                if let Err(diags) = parse(&text) {
                    prop_assert!(!diags.is_empty());
                }
                Ok(())
            })
            .unwrap();
        runs += 1_000;
    }
    println!("{runs} inputs parsed");
}

// ---------------------------------------------------------------------------
// Sessions and conformance

fn fixture(which: usize) -> Model {
    [fixtures::trafficlight, fixtures::mytodo][which]()
}

/// A walk that picks among enabled instances, so every step fires.
fn enabled_walk(m: &Model, choices: &[prop::sample::Index]) -> Vec<ActionInstance> {
    let universe = Universe::default();
    let mut state = initial_state(m).unwrap();
    let mut out = Vec::new();
    for c in choices {
        let enabled = enabled_actions(m, &state, &universe);
        if enabled.is_empty() {
            break;
        }
        let a = enabled[c.index(enabled.len())].clone();
        if let Ok(StepOutcome::Fired { next, .. }) = step(m, &state, &a) {
            state = next;
        }
        out.push(a);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn undo_k_times_returns_to_init(which in 0usize..2, choices in prop::collection::vec(any::<prop::sample::Index>(), 0..=20)) {
        let m = std::sync::Arc::new(fixture(which));
        let mut session = Session::new(m.clone()).unwrap();
        let init = session.current().clone();
        let walk = enabled_walk(&m, &choices);
        for a in &walk {
            prop_assert!(session.fire(a).unwrap().is_fired());
        }
        let replayed = replay(&m, session.recorded()).unwrap();
        prop_assert_eq!(&replayed.final_state, session.current());
        for _ in &walk {
            session.undo().unwrap();
        }
        prop_assert_eq!(session.current(), &init);
        prop_assert!(session.undo().is_err());
    }

    #[test]
    fn self_generated_traces_conform_and_mutations_diverge(
        which in 0usize..2,
        choices in prop::collection::vec(any::<prop::sample::Index>(), 1..=20),
        at in any::<prop::sample::Index>(),
        order in prop::sample::select(vec![ListOrder::IdKeyed, ListOrder::Strict]),
    ) {
        let m = fixture(which);
        let walk = enabled_walk(&m, &choices);
        prop_assume!(!walk.is_empty());
        let run = replay(&m, &Trace::from_actions(walk)).unwrap();
        let mut trace = Trace {
            steps: run.steps.iter().map(|s| TraceStep { action: s.action.clone(), expected: Some(s.observable.clone()) }).collect(),
        };
        prop_assert!(check_conformance(&m, &trace, order).unwrap().is_conformant());

        let i = at.index(trace.len());
        let expected = trace.steps[i].expected.as_mut().unwrap();
        let (_, v) = &mut expected.bindings[0];
        *v = mutate(v);
        let report = check_conformance(&m, &trace, order).unwrap();
        prop_assert_eq!(report.status, DivergenceStatus::Diverged);
        prop_assert_eq!(report.step_index, Some(i));
    }
}

/// A different value of the same type.
fn mutate(v: &Value) -> Value {
    match v {
        Value::Sym { enum_name, member } => {
            let other = if member == "Red" { "Green" } else { "Red" };
            Value::sym(enum_name, other)
        }
        Value::List { elem, items } => {
            let mut items = items.clone();
            items.push(todo("t9", "delayed"));
            Value::List { elem: elem.clone(), items }
        }
        other => panic!("no mutation for {other}"),
    }
}
