//! Generators for well-typed expression and model source text, shared by
//! the property tests and the acceptance suite.

#![allow(dead_code)]

use proptest::prelude::*;

/// Shared declarations for generated expressions and models.
pub const HEADER: &str = "enum Status { notdone, done, delayed }\nrecord Todo { id: id, status: Status }\n";

pub fn status_lit() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["Status.notdone", "Status.done", "Status.delayed"]).prop_map(String::from)
}

/// Predicates over the element bound by `where`.
pub fn elem_pred() -> impl Strategy<Value = String> {
    prop_oneof![
        status_lit().prop_map(|s| format!(".status == {s}")),
        status_lit().prop_map(|s| format!(".status != {s}")),
        Just(".id == t".to_string()),
        Just(".id != last".to_string()),
        Just("true".to_string()),
        (status_lit(), Just(())).prop_map(|(s, _)| format!("(.status in {{{s}}} or .id == t)")),
    ]
}

pub fn id_expr() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["t", "last", "none"]).prop_map(String::from)
}

/// Source text of well-typed expressions of each type, over the scope
/// `n: int, b: bool, p: Status, t: id, last: id, l: list<Todo>`.
#[derive(Debug, Clone)]
pub struct Typed {
    pub int: BoxedStrategy<String>,
    pub bool_: BoxedStrategy<String>,
    pub status: BoxedStrategy<String>,
    pub list: BoxedStrategy<String>,
}

pub fn typed() -> Typed {
    // An empty list literal needs an expected type, so `[]` only appears
    // where one is known: on the right of an update.
    let list = Just("l".to_string())
        .prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), id_expr(), status_lit())
                    .prop_map(|(l, t, s)| format!("add({l}, {{id: {t}, status: {s}}})")),
                (inner.clone(), elem_pred()).prop_map(|(l, p)| format!("remove({l} where {p})")),
                (inner, elem_pred(), status_lit())
                    .prop_map(|(l, p, s)| format!("update({l} where {p} set status := {s})")),
            ]
        })
        .boxed();
    let status = prop_oneof![
        3 => status_lit(),
        2 => Just("p".to_string()),
        1 => (list.clone(), id_expr()).prop_map(|(l, t)| format!("status({l}, {t})")),
        1 => (list.clone(), elem_pred()).prop_map(|(l, p)| format!("find({l} where {p}).status")),
    ]
    .boxed();
    let int = prop_oneof![
        (0i64..5).prop_map(|n| n.to_string()),
        Just("n".to_string()),
        list.clone().prop_map(|l| format!("len({l})")),
        (list.clone(), elem_pred()).prop_map(|(l, p)| format!("count({l} where {p})")),
    ]
    .prop_recursive(3, 16, 2, |inner| {
        (inner.clone(), prop::sample::select(vec!["+", "-"]), inner).prop_map(|(a, op, b)| format!("({a} {op} {b})"))
    })
    .boxed();
    let bool_atoms = prop_oneof![
        Just("true".to_string()),
        Just("b".to_string()),
        (int.clone(), prop::sample::select(vec!["<", "<=", ">", ">=", "==", "!="]), int.clone())
            .prop_map(|(a, op, c)| format!("{a} {op} {c}")),
        (status.clone(), status.clone()).prop_map(|(a, c)| format!("{a} == {c}")),
        (status.clone(), status_lit()).prop_map(|(a, s)| format!("{a} in {{{s}, Status.delayed}}")),
        (status.clone(), status_lit()).prop_map(|(a, s)| format!("{a} not in {{{s}}}")),
        (list.clone(), id_expr()).prop_map(|(l, t)| format!("contains({l}, {t})")),
        (list.clone(), elem_pred()).prop_map(|(l, p)| format!("exists({l} where {p})")),
        (id_expr(), id_expr()).prop_map(|(a, c)| format!("{a} == {c}")),
    ];
    let bool_ = bool_atoms
        .prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, c)| format!("({a} and {c})")),
                (inner.clone(), inner.clone()).prop_map(|(a, c)| format!("({a} or {c})")),
                inner.prop_map(|a| format!("not {a}")),
            ]
        })
        .boxed();
    Typed { int, bool_, status, list }
}

pub const VARS: [(&str, &str, &str); 5] = [
    ("n", "int", "0"),
    ("b", "bool", "false"),
    ("p", "Status", "Status.notdone"),
    ("last", "id", "none"),
    ("l", "list<Todo>", "[]"),
];

pub fn expr_of(ty: &str, t: &Typed) -> BoxedStrategy<String> {
    match ty {
        "int" => t.int.clone(),
        "bool" => t.bool_.clone(),
        "Status" => t.status.clone(),
        "id" => id_expr().boxed(),
        _ => prop_oneof![t.list.clone(), Just("[]".to_string())].boxed(),
    }
}

/// Source of a model over every variable in `VARS`, with random rules.
pub fn model_source() -> impl Strategy<Value = String> {
    let t = typed();
    let update = prop::sample::select((0..VARS.len()).collect::<Vec<_>>())
        .prop_flat_map(move |i| expr_of(VARS[i].1, &t).prop_map(move |e| (i, e)));
    let rule = (
        prop::sample::select(vec!["Go", "Stop"]),
        prop::option::of(typed().bool_),
        prop::collection::vec(update, 1..4),
        prop::option::of(0u32..100),
    );
    (prop::collection::vec(rule, 1..6), any::<bool>(), any::<bool>()).prop_map(|(rules, meta, invariant)| {
        let mut src = String::from("model Gen\n");
        if meta {
            src.push_str("meta codebase: \"gen\"\n");
        }
        src.push_str(HEADER);
        for (name, ty, _) in VARS {
            src.push_str(&format!("var {name}: {ty}\n"));
        }
        for (name, _, init) in VARS {
            src.push_str(&format!("init {name} := {init}\n"));
        }
        src.push_str("action Go(t: id)\naction Stop(t: id)\nobserve (size: len(l), last: last)\n");
        for (i, (action, guard, updates, link)) in rules.into_iter().enumerate() {
            let mut seen = Vec::new();
            let updates: Vec<String> = updates
                .into_iter()
                .filter(|(v, _)| {
                    let fresh = !seen.contains(v);
                    seen.push(*v);
                    fresh
                })
                .map(|(v, e)| format!("{} := {e}", VARS[v].0))
                .collect();
            let guard = guard.map(|g| format!(" when {g}")).unwrap_or_default();
            let link = link.map(|n| format!(" @impl(\"src/gen.rs:{n}\")")).unwrap_or_default();
            src.push_str(&format!("rule r{i}: on {action}{guard} => {}{link}\n", updates.join(", ")));
        }
        if invariant {
            src.push_str("invariant small: len(l) <= 3\n");
        }
        src
    })
}
