//! The six-tuple model and its single-step semantics.
//!
//! A [`Model`] holds the state variables and their types (the state space),
//! one initial assignment, the action signatures, an ordered list of guarded
//! rules (the transition function), and an observe clause (the display map
//! from states to observables).

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::analysis::Universe;
use crate::diag::{codes, Diagnostic, Span};
use crate::expr::{eval, eval_bool, typecheck, Bindings, EvalError, Expr, Layered, TypeScope};
use crate::value::{Decls, TypeExpr, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSig {
    pub name: String,
    pub params: Vec<(String, TypeExpr)>,
}

/// An element of the action set: a declared action with bound arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionInstance {
    pub name: String,
    pub args: Vec<Value>,
}

impl ActionInstance {
    pub fn new(name: &str, args: Vec<Value>) -> Self {
        ActionInstance { name: name.to_string(), args }
    }

    pub fn bare(name: &str) -> Self {
        ActionInstance::new(name, Vec::new())
    }
}

impl fmt::Display for ActionInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// One case of the transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub label: String,
    pub action: String,
    pub guard: Expr,
    pub updates: Vec<(String, Expr)>,
    pub impl_link: Option<String>,
}

/// Spans of the declarations a model was parsed from, parallel to the model's vectors.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub model: Span,
    pub enums: Vec<Span>,
    pub records: Vec<Span>,
    pub state_vars: Vec<Span>,
    pub init: Vec<Span>,
    pub actions: Vec<Span>,
    pub rules: Vec<Span>,
    pub observe: Span,
    pub invariants: Vec<Span>,
}

fn span_at(spans: &[Span], i: usize, fallback: &Span) -> Span {
    spans.get(i).cloned().unwrap_or_else(|| fallback.clone())
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub name: String,
    pub types: Decls,
    pub state_vars: Vec<(String, TypeExpr)>,
    pub init: Vec<(String, Expr)>,
    pub actions: Vec<ActionSig>,
    pub rules: Vec<Rule>,
    pub observe: Vec<(String, Expr)>,
    pub invariants: Vec<(String, Expr)>,
    pub meta: Vec<(String, String)>,
    pub source: SourceMap,
}

/// Structural equality; source locations are ignored.
impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.types == other.types
            && self.state_vars == other.state_vars
            && self.init == other.init
            && self.actions == other.actions
            && self.rules == other.rules
            && self.observe == other.observe
            && self.invariants == other.invariants
            && self.meta == other.meta
    }
}

impl Eq for Model {}

/// Meta key declaring the codebase a model maps to. Models that declare it
/// are expected to link every rule to its implementation with `@impl`.
pub const CODEBASE_META: &str = "codebase";

impl Model {
    pub fn action(&self, name: &str) -> Option<&ActionSig> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn var_type(&self, name: &str) -> Option<&TypeExpr> {
        self.state_vars.iter().find(|(v, _)| v == name).map(|(_, t)| t)
    }

    pub fn rule(&self, label: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.label == label)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn expects_impl_links(&self) -> bool {
        self.meta(CODEBASE_META).is_some()
    }

    pub fn state_scope(&self) -> TypeScope {
        self.state_vars.iter().cloned().collect()
    }

    /// State variables plus the parameters of `action`; parameters shadow variables.
    pub fn rule_scope(&self, action: &ActionSig) -> TypeScope {
        let mut scope = self.state_scope();
        scope.extend(action.params.iter().cloned());
        scope
    }
}

/// An environment of named values in declaration order: a state (one element
/// of the state space) or an observable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Env {
    pub bindings: Vec<(String, Value)>,
}

pub type StateEnv = Env;
pub type ObsEnv = Env;

impl Env {
    pub fn new(bindings: Vec<(String, Value)>) -> Self {
        Env { bindings }
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.lookup(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|(n, _)| n.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.bindings.iter().map(|(_, v)| v)
    }

    /// Canonical text form, also used as the state's identity during exploration.
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl Bindings for Env {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.bindings.lookup(name)
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (name, value)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}: {value}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Fired { rule: String, next: StateEnv, observable: ObsEnv },
    /// No rule covers this (state, action) pair.
    Undefined,
}

impl StepOutcome {
    pub fn is_fired(&self) -> bool {
        matches!(self, StepOutcome::Fired { .. })
    }
}

/// Evaluates the initial assignment into a state.
pub fn initial_state(model: &Model) -> Result<StateEnv, EvalError> {
    let empty: Vec<(String, Value)> = Vec::new();
    let mut bindings = Vec::with_capacity(model.state_vars.len());
    for (var, _) in &model.state_vars {
        let (_, expr) = model
            .init
            .iter()
            .find(|(v, _)| v == var)
            .ok_or_else(|| EvalError {
                kind: crate::expr::EvalErrorKind::TypeMismatchAtRuntime,
                detail: format!("init does not cover variable {var}"),
                span: None,
            })?;
        bindings.push((var.clone(), eval(expr, &empty)?));
    }
    Ok(Env::new(bindings))
}

fn bind_params(sig: &ActionSig, action: &ActionInstance) -> Result<Vec<(String, Value)>, EvalError> {
    if sig.params.len() != action.args.len() {
        return Err(EvalError {
            kind: crate::expr::EvalErrorKind::TypeMismatchAtRuntime,
            detail: format!("{} expects {} argument(s), got {}", sig.name, sig.params.len(), action.args.len()),
            span: None,
        });
    }
    Ok(sig.params.iter().map(|(n, _)| n.clone()).zip(action.args.iter().cloned()).collect())
}

/// Applies the transition function once.
///
/// Rules are scanned in declaration order and the first one whose action
/// matches and whose guard holds fires. Every update reads the pre-state;
/// variables the rule does not mention carry over unchanged.
pub fn step(model: &Model, state: &StateEnv, action: &ActionInstance) -> Result<StepOutcome, EvalError> {
    let sig = model.action(&action.name).ok_or_else(|| EvalError {
        kind: crate::expr::EvalErrorKind::TypeMismatchAtRuntime,
        detail: format!("unknown action {}", action.name),
        span: None,
    })?;
    let params = bind_params(sig, action)?;
    let env = Layered(params.as_slice(), state);

    for (i, rule) in model.rules.iter().enumerate() {
        if rule.action != action.name {
            continue;
        }
        let span = || span_at(&model.source.rules, i, &model.source.model);
        if !eval_bool(&rule.guard, &env).map_err(|e| e.at(span()))? {
            continue;
        }
        let mut updated: Vec<(String, Value)> = Vec::with_capacity(rule.updates.len());
        for (var, rhs) in &rule.updates {
            updated.push((var.clone(), eval(rhs, &env).map_err(|e| e.at(span()))?));
        }
        let next = Env::new(
            state
                .bindings
                .iter()
                .map(|(name, old)| {
                    let value = updated.iter().find(|(v, _)| v == name).map_or(old, |(_, v)| v);
                    (name.clone(), value.clone())
                })
                .collect(),
        );
        let observable = observe(model, &next)?;
        return Ok(StepOutcome::Fired { rule: rule.label.clone(), next, observable });
    }
    Ok(StepOutcome::Undefined)
}

/// The display map: evaluates every observe expression against `state`.
pub fn observe(model: &Model, state: &StateEnv) -> Result<ObsEnv, EvalError> {
    let bindings = model
        .observe
        .iter()
        .map(|(name, expr)| Ok((name.clone(), eval(expr, state).map_err(|e| e.at(model.source.observe.clone()))?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(Env::new(bindings))
}

/// Every instance of `sig` over the universe, in parameter order with the
/// last parameter varying fastest.
pub fn instances(model: &Model, sig: &ActionSig, universe: &Universe) -> Vec<ActionInstance> {
    let pools: Vec<Vec<Value>> = sig.params.iter().map(|(_, ty)| universe.candidates(ty, &model.types)).collect();
    let mut out = vec![Vec::new()];
    for pool in &pools {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Value>| {
                pool.iter().map(move |v| {
                    let mut args = prefix.clone();
                    args.push(v.clone());
                    args
                })
            })
            .collect();
    }
    out.into_iter().map(|args| ActionInstance::new(&sig.name, args)).collect()
}

/// All action instances over `universe` that fire from `state`, in action
/// declaration order and then universe order. An instance whose guards or
/// updates fail to evaluate is not enabled.
pub fn enabled_actions(model: &Model, state: &StateEnv, universe: &Universe) -> Vec<ActionInstance> {
    model
        .actions
        .iter()
        .flat_map(|sig| instances(model, sig, universe))
        .filter(|inst| matches!(step(model, state, inst), Ok(StepOutcome::Fired { .. })))
        .collect()
}

/// Checks that an action instance matches its signature.
pub fn check_action(model: &Model, action: &ActionInstance) -> Result<(), String> {
    let sig = model.action(&action.name).ok_or_else(|| format!("unknown action {}", action.name))?;
    if sig.params.len() != action.args.len() {
        return Err(format!("{} expects {} argument(s), got {}", sig.name, sig.params.len(), action.args.len()));
    }
    for ((pname, pty), arg) in sig.params.iter().zip(&action.args) {
        if !model.types.conforms(arg, pty) {
            return Err(format!("argument {pname} of {} expects {pty}, got {arg}", sig.name));
        }
    }
    Ok(())
}

/// Checks the model's well-formedness invariants.
///
/// Returns an empty list iff the model is well-formed and draws no warnings.
pub fn validate_model(model: &Model) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let src = &model.source;
    let fallback = &src.model;

    let check_unique = |kind: &str, names: Vec<&str>, spans: &[Span], diags: &mut Vec<Diagnostic>| {
        let mut seen = HashSet::new();
        for (i, name) in names.into_iter().enumerate() {
            if !seen.insert(name) {
                diags.push(Diagnostic::error(
                    codes::DUPLICATE,
                    span_at(spans, i, fallback),
                    format!("duplicate {kind} {name}"),
                ));
            }
        }
    };
    check_unique("enum", model.types.enums.iter().map(|e| e.name.as_str()).collect(), &src.enums, &mut diags);
    check_unique("record", model.types.records.iter().map(|r| r.name.as_str()).collect(), &src.records, &mut diags);
    check_unique("variable", model.state_vars.iter().map(|(n, _)| n.as_str()).collect(), &src.state_vars, &mut diags);
    check_unique("action", model.actions.iter().map(|a| a.name.as_str()).collect(), &src.actions, &mut diags);
    check_unique("rule label", model.rules.iter().map(|r| r.label.as_str()).collect(), &src.rules, &mut diags);
    check_unique("invariant", model.invariants.iter().map(|(n, _)| n.as_str()).collect(), &src.invariants, &mut diags);
    check_unique("observe output", model.observe.iter().map(|(n, _)| n.as_str()).collect(), &[], &mut diags);

    for (i, decl) in model.types.enums.iter().enumerate() {
        let mut seen = HashSet::new();
        for m in &decl.members {
            if !seen.insert(m) {
                diags.push(Diagnostic::error(
                    codes::DUPLICATE,
                    span_at(&src.enums, i, fallback),
                    format!("duplicate member {m} in enum {}", decl.name),
                ));
            }
        }
        if decl.members.is_empty() {
            diags.push(Diagnostic::error(codes::INVALID_TYPE, span_at(&src.enums, i, fallback), format!("enum {} has no members", decl.name)));
        }
    }
    for (i, decl) in model.types.records.iter().enumerate() {
        let span = span_at(&src.records, i, fallback);
        let mut seen = HashSet::new();
        for (fname, fty) in &decl.fields {
            if !seen.insert(fname) {
                diags.push(Diagnostic::error(codes::DUPLICATE, span.clone(), format!("duplicate field {fname} in record {}", decl.name)));
            }
            if matches!(fty, TypeExpr::List(_)) {
                diags.push(Diagnostic::error(codes::INVALID_TYPE, span.clone(), format!("record field {}.{fname} may not be a list", decl.name)));
            } else if let Err(msg) = model.types.check_type(fty) {
                diags.push(Diagnostic::error(codes::UNKNOWN_TYPE, span.clone(), msg));
            }
        }
    }
    for (i, (name, ty)) in model.state_vars.iter().enumerate() {
        if let Err(msg) = model.types.check_type(ty) {
            diags.push(Diagnostic::error(codes::UNKNOWN_TYPE, span_at(&src.state_vars, i, fallback), format!("variable {name}: {msg}")));
        }
    }
    for (i, sig) in model.actions.iter().enumerate() {
        let span = span_at(&src.actions, i, fallback);
        let mut seen = HashSet::new();
        for (pname, pty) in &sig.params {
            if !seen.insert(pname) {
                diags.push(Diagnostic::error(codes::DUPLICATE, span.clone(), format!("duplicate parameter {pname} in action {}", sig.name)));
            }
            if !pty.is_scalar() {
                diags.push(Diagnostic::error(codes::INVALID_TYPE, span.clone(), format!("parameter {pname} of {} must be bool, int, id or an enum", sig.name)));
            } else if let Err(msg) = model.types.check_type(pty) {
                diags.push(Diagnostic::error(codes::UNKNOWN_TYPE, span.clone(), msg));
            }
        }
    }

    // Initial assignment: total, constant, well-typed.
    let no_vars = TypeScope::new();
    let mut initialised: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, (var, expr)) in model.init.iter().enumerate() {
        let span = span_at(&src.init, i, fallback);
        if initialised.insert(var.as_str(), i).is_some() {
            diags.push(Diagnostic::error(codes::INIT_UNKNOWN, span.clone(), format!("variable {var} initialised twice")));
            continue;
        }
        let Some(ty) = model.var_type(var) else {
            diags.push(Diagnostic::error(codes::INIT_UNKNOWN, span, format!("init for undeclared variable {var}")));
            continue;
        };
        if !expr.is_constant() {
            diags.push(Diagnostic::error(codes::INIT_NOT_CONSTANT, span, format!("init of {var} must be a literal")));
            continue;
        }
        match typecheck(expr, &no_vars, &model.types) {
            Ok(t) if &t == ty => {}
            Ok(t) => diags.push(Diagnostic::error(codes::TYPE_MISMATCH, span, format!("init of {var} expects {ty}, found {t}"))),
            Err(ds) => diags.extend(ds.into_iter().map(|d| Diagnostic { span: span.clone(), ..d })),
        }
    }
    for (i, (var, _)) in model.state_vars.iter().enumerate() {
        if !initialised.contains_key(var.as_str()) {
            diags.push(Diagnostic::error(
                codes::INIT_MISSING,
                span_at(&src.state_vars, i, fallback),
                format!("init does not cover variable {var}"),
            ));
        }
    }

    // Rules.
    for (i, rule) in model.rules.iter().enumerate() {
        let span = span_at(&src.rules, i, fallback);
        let Some(sig) = model.action(&rule.action) else {
            diags.push(Diagnostic::error(codes::UNKNOWN_ACTION, span, format!("unknown action {}", rule.action)));
            continue;
        };
        let scope = model.rule_scope(sig);
        match typecheck(&rule.guard, &scope, &model.types) {
            Ok(TypeExpr::Bool) => {}
            Ok(t) => diags.push(Diagnostic::error(codes::TYPE_MISMATCH, span.clone(), format!("guard of {} must be Bool, found {t}", rule.label))),
            Err(ds) => diags.extend(ds.into_iter().map(|d| Diagnostic { span: span.clone(), ..d })),
        }
        let mut assigned = HashSet::new();
        for (var, rhs) in &rule.updates {
            if !assigned.insert(var.as_str()) {
                diags.push(Diagnostic::error(codes::BAD_UPDATE, span.clone(), format!("rule {} updates {var} twice", rule.label)));
                continue;
            }
            let Some(ty) = model.var_type(var) else {
                diags.push(Diagnostic::error(codes::BAD_UPDATE, span.clone(), format!("rule {} updates undeclared variable {var}", rule.label)));
                continue;
            };
            match typecheck(rhs, &scope, &model.types) {
                Ok(t) if &t == ty => {}
                Ok(t) => diags.push(Diagnostic::error(
                    codes::TYPE_MISMATCH,
                    span.clone(),
                    format!("rule {} assigns {t} to {var}: {ty}", rule.label),
                )),
                Err(ds) => diags.extend(ds.into_iter().map(|d| Diagnostic { span: span.clone(), ..d })),
            }
        }
    }

    // Observe clause and invariants read state variables only.
    let state_scope = model.state_scope();
    if model.observe.is_empty() {
        diags.push(Diagnostic::error(codes::NO_OBSERVE, fallback.clone(), "model has no observe clause"));
    }
    for (name, expr) in &model.observe {
        if let Err(ds) = typecheck(expr, &state_scope, &model.types) {
            diags.extend(ds.into_iter().map(|d| Diagnostic {
                span: src.observe.clone(),
                message: format!("observe {name}: {}", d.message),
                ..d
            }));
        }
    }
    for (i, (name, expr)) in model.invariants.iter().enumerate() {
        let span = span_at(&src.invariants, i, fallback);
        match typecheck(expr, &state_scope, &model.types) {
            Ok(TypeExpr::Bool) => {}
            Ok(t) => diags.push(Diagnostic::error(codes::TYPE_MISMATCH, span, format!("invariant {name} must be Bool, found {t}"))),
            Err(ds) => diags.extend(ds.into_iter().map(|d| Diagnostic { span: span.clone(), ..d })),
        }
    }

    // Warnings.
    for (i, sig) in model.actions.iter().enumerate() {
        if !model.rules.iter().any(|r| r.action == sig.name) {
            diags.push(Diagnostic::warning(
                codes::UNUSED_ACTION,
                span_at(&src.actions, i, fallback),
                format!("action {} has no rule", sig.name),
            ));
        }
    }
    if model.expects_impl_links() {
        for (i, rule) in model.rules.iter().enumerate() {
            if rule.impl_link.is_none() {
                diags.push(
                    Diagnostic::warning(codes::MISSING_IMPL, span_at(&src.rules, i, fallback), format!("rule {} lacks @impl link", rule.label))
                        .with_hint("annotate the rule with @impl(\"path:line\")"),
                );
            }
        }
    }
    diags
}
