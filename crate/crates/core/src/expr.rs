//! The guard/update/observe expression language: typing and evaluation.
//!
//! Expressions here are already name-resolved: bare identifiers have been
//! turned into variable references, enum symbols or id literals by the front
//! end. Inside a `where` clause the current list element is [`Expr::Elem`]
//! (written `it`, or `.field` for `it.field`).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::diag::{codes, Diagnostic, Span};
use crate::value::{Decls, TypeExpr, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicOp {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Len,
    Count,
    Exists,
    Contains,
    Find,
    Add,
    Remove,
    Update,
    Status,
}

impl Builtin {
    pub const ALL: [Builtin; 9] = [
        Builtin::Len,
        Builtin::Count,
        Builtin::Exists,
        Builtin::Contains,
        Builtin::Find,
        Builtin::Add,
        Builtin::Remove,
        Builtin::Update,
        Builtin::Status,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Len => "len",
            Builtin::Count => "count",
            Builtin::Exists => "exists",
            Builtin::Contains => "contains",
            Builtin::Find => "find",
            Builtin::Add => "add",
            Builtin::Remove => "remove",
            Builtin::Update => "update",
            Builtin::Status => "status",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Builtins that take a single list argument filtered by a `where` predicate.
    pub fn takes_filter(self) -> bool {
        matches!(self, Builtin::Count | Builtin::Exists | Builtin::Find | Builtin::Remove | Builtin::Update)
    }

    /// Number of positional arguments.
    pub fn arity(self) -> usize {
        match self {
            Builtin::Contains | Builtin::Add | Builtin::Status => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Call {
    pub builtin: Builtin,
    pub args: Vec<Expr>,
    /// Predicate over the current element, for filtering builtins.
    pub filter: Option<Box<Expr>>,
    /// `set field := expr`, only for `update`.
    pub set: Option<(String, Box<Expr>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Value),
    Var(String),
    /// The list element bound by an enclosing `where`.
    Elem,
    Field(Box<Expr>, String),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Logic(LogicOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    InSet(Box<Expr>, Vec<Value>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    /// Record construction; fields in declaration order.
    Record(String, Vec<(String, Expr)>),
    List(TypeExpr, Vec<Expr>),
    Call(Call),
}

impl Expr {
    pub fn truth() -> Expr {
        Expr::Lit(Value::Bool(true))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn compare(op: CmpOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Compare(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn and(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Logic(LogicOp::And, Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Logic(LogicOp::Or, Box::new(lhs), Box::new(rhs))
    }

    pub fn not(inner: Expr) -> Expr {
        Expr::Not(Box::new(inner))
    }

    pub fn field(base: Expr, name: &str) -> Expr {
        Expr::Field(Box::new(base), name.to_string())
    }

    pub fn call(builtin: Builtin, args: Vec<Expr>) -> Expr {
        Expr::Call(Call { builtin, args, filter: None, set: None })
    }

    pub fn call_where(builtin: Builtin, list: Expr, filter: Expr) -> Expr {
        Expr::Call(Call { builtin, args: vec![list], filter: Some(Box::new(filter)), set: None })
    }

    /// True if the expression mentions no variables, element references or calls.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Lit(_) => true,
            Expr::Var(_) | Expr::Elem | Expr::Call(_) => false,
            Expr::Field(base, _) => base.is_constant(),
            Expr::Compare(_, a, b) | Expr::Logic(_, a, b) | Expr::Arith(_, a, b) => a.is_constant() && b.is_constant(),
            Expr::Not(a) | Expr::InSet(a, _) => a.is_constant(),
            Expr::Record(_, fields) => fields.iter().all(|(_, e)| e.is_constant()),
            Expr::List(_, items) => items.iter().all(Expr::is_constant),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Logic(LogicOp::Or, ..) => 1,
            Expr::Logic(LogicOp::And, ..) => 2,
            Expr::Not(inner) if matches!(**inner, Expr::InSet(..)) => 4,
            Expr::Not(_) => 3,
            Expr::Compare(..) | Expr::InSet(..) => 4,
            Expr::Arith(..) => 5,
            Expr::Lit(Value::Int(n)) if *n < 0 => 6,
            _ => 7,
        }
    }
}

struct Prec<'a>(&'a Expr, u8);

impl fmt::Display for Prec<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.precedence() < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn write_in_set(f: &mut fmt::Formatter<'_>, subject: &Expr, op: &str, members: &[Value]) -> fmt::Result {
    write!(f, "{} {op} {{", Prec(subject, 5))?;
    for (i, m) in members.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{m}")?;
    }
    f.write_str("}")
}

/// Canonical surface syntax; parses back to the same expression.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(name) => f.write_str(name),
            Expr::Elem => f.write_str("it"),
            Expr::Field(base, field) => match **base {
                Expr::Elem => write!(f, ".{field}"),
                _ => write!(f, "{}.{field}", Prec(base, 7)),
            },
            Expr::Compare(op, a, b) => write!(f, "{} {} {}", Prec(a, 5), op.symbol(), Prec(b, 5)),
            Expr::Logic(op, a, b) => {
                let (p, word) = match op {
                    LogicOp::Or => (1, "or"),
                    LogicOp::And => (2, "and"),
                };
                write!(f, "{} {word} {}", Prec(a, p), Prec(b, p + 1))
            }
            Expr::Not(a) => match &**a {
                Expr::InSet(subject, members) => write_in_set(f, subject, "not in", members),
                _ => write!(f, "not {}", Prec(a, 3)),
            },
            Expr::InSet(a, members) => write_in_set(f, a, "in", members),
            Expr::Arith(op, a, b) => {
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                };
                write!(f, "{} {sym} {}", Prec(a, 5), Prec(b, 6))
            }
            Expr::Record(_, fields) => {
                f.write_str("{")?;
                for (i, (name, e)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {e}")?;
                }
                f.write_str("}")
            }
            Expr::List(_, items) => {
                f.write_str("[")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("]")
            }
            Expr::Call(call) => {
                write!(f, "{}(", call.builtin.name())?;
                for (i, e) in call.args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                if let Some(pred) = &call.filter {
                    write!(f, " where {pred}")?;
                }
                if let Some((field, e)) = &call.set {
                    write!(f, " set {field} := {e}")?;
                }
                f.write_str(")")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Typing

/// Variable types visible to an expression.
pub type TypeScope = BTreeMap<String, TypeExpr>;

struct Checker<'a> {
    scope: &'a TypeScope,
    decls: &'a Decls,
}

type TypeResult = Result<TypeExpr, Vec<Diagnostic>>;

fn type_error(code: &'static str, message: impl Into<String>) -> Vec<Diagnostic> {
    vec![Diagnostic::error(code, Span::default(), message)]
}

/// Computes the static type of `expr`.
///
/// Diagnostics carry an empty span; callers that know where the expression
/// came from should attach one.
pub fn typecheck(expr: &Expr, scope: &TypeScope, decls: &Decls) -> TypeResult {
    Checker { scope, decls }.check(expr, None)
}

/// Like [`typecheck`], inside a `where` clause whose element has type `elem`.
pub fn typecheck_in(expr: &Expr, scope: &TypeScope, decls: &Decls, elem: Option<&TypeExpr>) -> TypeResult {
    Checker { scope, decls }.check(expr, elem)
}

impl Checker<'_> {
    fn check(&self, expr: &Expr, elem: Option<&TypeExpr>) -> TypeResult {
        match expr {
            Expr::Lit(v) => {
                let ty = v.type_expr();
                if self.decls.check_type(&ty).is_err() || !self.decls.conforms(v, &ty) {
                    return Err(type_error(codes::UNKNOWN_MEMBER, format!("literal {v} does not match any declaration")));
                }
                Ok(ty)
            }
            Expr::Var(name) => self
                .scope
                .get(name)
                .cloned()
                .ok_or_else(|| type_error(codes::UNKNOWN_NAME, format!("unknown name {name}"))),
            Expr::Elem => elem
                .cloned()
                .ok_or_else(|| type_error(codes::BAD_WHERE, "`it` used outside a where clause")),
            Expr::Field(base, field) => {
                let base_ty = self.check(base, elem)?;
                let TypeExpr::Record(rname) = &base_ty else {
                    return Err(type_error(codes::UNKNOWN_FIELD, format!("field access .{field} on non-record type {base_ty}")));
                };
                self.decls
                    .record_decl(rname)
                    .and_then(|r| r.field_type(field))
                    .cloned()
                    .ok_or_else(|| type_error(codes::UNKNOWN_FIELD, format!("record {rname} has no field {field}")))
            }
            Expr::Compare(op, a, b) => {
                let (ta, tb) = both(self.check(a, elem), self.check(b, elem))?;
                if ta != tb {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("cannot compare {ta} with {tb}")));
                }
                if op.is_ordering() && ta != TypeExpr::Int {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("`{}` requires Int operands, found {ta}", op.symbol())));
                }
                Ok(TypeExpr::Bool)
            }
            Expr::Logic(_, a, b) => {
                let (ta, tb) = both(self.check(a, elem), self.check(b, elem))?;
                if ta != TypeExpr::Bool || tb != TypeExpr::Bool {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("and/or require Bool operands, found {ta} and {tb}")));
                }
                Ok(TypeExpr::Bool)
            }
            Expr::Not(a) => {
                let ta = self.check(a, elem)?;
                if ta != TypeExpr::Bool {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("not requires a Bool operand, found {ta}")));
                }
                Ok(TypeExpr::Bool)
            }
            Expr::InSet(subject, members) => {
                let ts = self.check(subject, elem)?;
                if !ts.is_scalar() {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("set membership requires a scalar subject, found {ts}")));
                }
                for m in members {
                    if m.type_expr() != ts || !self.decls.conforms(m, &ts) {
                        return Err(type_error(codes::TYPE_MISMATCH, format!("set member {m} is not a {ts}")));
                    }
                }
                Ok(TypeExpr::Bool)
            }
            Expr::Arith(_, a, b) => {
                let (ta, tb) = both(self.check(a, elem), self.check(b, elem))?;
                if ta != TypeExpr::Int || tb != TypeExpr::Int {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("arith requires Int operands, found {ta} and {tb}")));
                }
                Ok(TypeExpr::Int)
            }
            Expr::Record(name, fields) => {
                let Some(decl) = self.decls.record_decl(name) else {
                    return Err(type_error(codes::UNKNOWN_TYPE, format!("unknown record {name}")));
                };
                let names: Vec<&str> = fields.iter().map(|(f, _)| f.as_str()).collect();
                let want: Vec<&str> = decl.fields.iter().map(|(f, _)| f.as_str()).collect();
                if names != want {
                    return Err(type_error(
                        codes::UNKNOWN_FIELD,
                        format!("record {name} expects fields {{{}}}, found {{{}}}", want.join(", "), names.join(", ")),
                    ));
                }
                let mut diags = Vec::new();
                for ((fname, e), (_, fty)) in fields.iter().zip(&decl.fields) {
                    match self.check(e, elem) {
                        Ok(t) if &t == fty => {}
                        Ok(t) => diags.extend(type_error(
                            codes::TYPE_MISMATCH,
                            format!("field {fname} of {name} expects {fty}, found {t}"),
                        )),
                        Err(d) => diags.extend(d),
                    }
                }
                if diags.is_empty() {
                    Ok(TypeExpr::Record(name.clone()))
                } else {
                    Err(diags)
                }
            }
            Expr::List(elem_ty, items) => {
                if let Err(msg) = self.decls.check_type(&TypeExpr::list_of(elem_ty.clone())) {
                    return Err(type_error(codes::INVALID_TYPE, msg));
                }
                let mut diags = Vec::new();
                for item in items {
                    match self.check(item, elem) {
                        Ok(t) if &t == elem_ty => {}
                        Ok(t) => diags.extend(type_error(
                            codes::TYPE_MISMATCH,
                            format!("list of {elem_ty} cannot hold {t}"),
                        )),
                        Err(d) => diags.extend(d),
                    }
                }
                if diags.is_empty() {
                    Ok(TypeExpr::list_of(elem_ty.clone()))
                } else {
                    Err(diags)
                }
            }
            Expr::Call(call) => self.check_call(call, elem),
        }
    }

    fn check_call(&self, call: &Call, elem: Option<&TypeExpr>) -> TypeResult {
        let b = call.builtin;
        let name = b.name();
        if call.args.len() != b.arity() {
            return Err(type_error(codes::BAD_CALL, format!("{name} takes {} argument(s), found {}", b.arity(), call.args.len())));
        }
        if b.takes_filter() != call.filter.is_some() {
            let msg = if b.takes_filter() {
                format!("{name} requires a `where` clause")
            } else {
                format!("{name} does not accept a `where` clause")
            };
            return Err(type_error(codes::BAD_WHERE, msg));
        }
        if (b == Builtin::Update) != call.set.is_some() {
            let msg = if b == Builtin::Update {
                "update requires `set field := expr`".to_string()
            } else {
                format!("{name} does not accept `set`")
            };
            return Err(type_error(codes::BAD_CALL, msg));
        }

        let mut arg_types = Vec::with_capacity(call.args.len());
        let mut diags = Vec::new();
        for a in &call.args {
            match self.check(a, elem) {
                Ok(t) => arg_types.push(t),
                Err(d) => diags.extend(d),
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }
        let list_ty = &arg_types[0];
        let Some(item_ty) = list_ty.list_elem() else {
            return Err(type_error(codes::TYPE_MISMATCH, format!("{name} expects a list, found {list_ty}")));
        };

        if let Some(pred) = &call.filter {
            let pt = self.check(pred, Some(item_ty))?;
            if pt != TypeExpr::Bool {
                return Err(type_error(codes::TYPE_MISMATCH, format!("where predicate must be Bool, found {pt}")));
            }
        }

        match b {
            Builtin::Len | Builtin::Count => Ok(TypeExpr::Int),
            Builtin::Exists => Ok(TypeExpr::Bool),
            Builtin::Find => Ok(item_ty.clone()),
            Builtin::Remove => Ok(list_ty.clone()),
            Builtin::Update => {
                let (field, e) = call.set.as_ref().expect("checked above");
                let field_ty = self.record_field(item_ty, field)?;
                let et = self.check(e, Some(item_ty))?;
                if et != field_ty {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("set {field} expects {field_ty}, found {et}")));
                }
                Ok(list_ty.clone())
            }
            Builtin::Add => {
                if &arg_types[1] != item_ty {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("add to list of {item_ty} given {}", arg_types[1])));
                }
                Ok(list_ty.clone())
            }
            Builtin::Contains => {
                let key_ty = match item_ty {
                    TypeExpr::Record(_) => self.record_field(item_ty, "id")?,
                    other => other.clone(),
                };
                if arg_types[1] != key_ty {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("contains expects {key_ty}, found {}", arg_types[1])));
                }
                Ok(TypeExpr::Bool)
            }
            Builtin::Status => {
                let key_ty = self.record_field(item_ty, "id")?;
                let status_ty = self.record_field(item_ty, "status")?;
                if arg_types[1] != key_ty {
                    return Err(type_error(codes::TYPE_MISMATCH, format!("status expects {key_ty}, found {}", arg_types[1])));
                }
                Ok(status_ty)
            }
        }
    }

    fn record_field(&self, ty: &TypeExpr, field: &str) -> TypeResult {
        let TypeExpr::Record(rname) = ty else {
            return Err(type_error(codes::UNKNOWN_FIELD, format!("expected records with field {field}, found {ty}")));
        };
        self.decls
            .record_decl(rname)
            .and_then(|r| r.field_type(field))
            .cloned()
            .ok_or_else(|| type_error(codes::UNKNOWN_FIELD, format!("record {rname} has no field {field}")))
    }
}

fn both(a: TypeResult, b: TypeResult) -> Result<(TypeExpr, TypeExpr), Vec<Diagnostic>> {
    match (a, b) {
        (Ok(a), Ok(b)) => Ok((a, b)),
        (Err(mut da), Err(db)) => {
            da.extend(db);
            Err(da)
        }
        (Err(d), _) | (_, Err(d)) => Err(d),
    }
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub enum EvalErrorKind {
    FindMiss,
    FindAmbiguous,
    NoSuchField,
    TypeMismatchAtRuntime,
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{detail}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub detail: String,
    /// Where the failing expression lives, when known.
    pub span: Option<Span>,
}

impl EvalError {
    fn new(kind: EvalErrorKind, detail: impl Into<String>) -> Self {
        EvalError { kind, detail: detail.into(), span: None }
    }

    fn mismatch(what: impl fmt::Display) -> Self {
        EvalError::new(EvalErrorKind::TypeMismatchAtRuntime, format!("runtime type mismatch: {what}"))
    }

    pub fn at(mut self, span: Span) -> Self {
        self.span.get_or_insert(span);
        self
    }
}

/// Name lookup for evaluation.
pub trait Bindings {
    fn lookup(&self, name: &str) -> Option<&Value>;
}

impl Bindings for BTreeMap<String, Value> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.get(name)
    }
}

impl Bindings for [(String, Value)] {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

impl Bindings for Vec<(String, Value)> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.as_slice().lookup(name)
    }
}

/// Two binding layers, the first shadowing the second.
pub struct Layered<'a, A: ?Sized, B: ?Sized>(pub &'a A, pub &'a B);

impl<A: Bindings + ?Sized, B: Bindings + ?Sized> Bindings for Layered<'_, A, B> {
    fn lookup(&self, name: &str) -> Option<&Value> {
        self.0.lookup(name).or_else(|| self.1.lookup(name))
    }
}

/// Evaluates a type-checked expression. Pure: `env` is never modified.
pub fn eval(expr: &Expr, env: &dyn Bindings) -> Result<Value, EvalError> {
    Evaluator { env }.eval(expr, None)
}

/// Evaluates a Bool-typed expression.
pub fn eval_bool(expr: &Expr, env: &dyn Bindings) -> Result<bool, EvalError> {
    let v = eval(expr, env)?;
    v.as_bool().ok_or_else(|| EvalError::mismatch(format!("expected Bool, found {v}")))
}

struct Evaluator<'a> {
    env: &'a dyn Bindings,
}

impl Evaluator<'_> {
    fn eval(&self, expr: &Expr, elem: Option<&Value>) -> Result<Value, EvalError> {
        match expr {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(name) => self
                .env
                .lookup(name)
                .cloned()
                .ok_or_else(|| EvalError::mismatch(format!("unbound variable {name}"))),
            Expr::Elem => elem.cloned().ok_or_else(|| EvalError::mismatch("`it` outside where")),
            Expr::Field(base, field) => {
                let v = self.eval(base, elem)?;
                match &v {
                    Value::Record { .. } => v
                        .field(field)
                        .cloned()
                        .ok_or_else(|| EvalError::new(EvalErrorKind::NoSuchField, format!("{v} has no field {field}"))),
                    _ => Err(EvalError::mismatch(format!("field .{field} of non-record {v}"))),
                }
            }
            Expr::Compare(op, a, b) => {
                let (va, vb) = (self.eval(a, elem)?, self.eval(b, elem)?);
                let result = match op {
                    CmpOp::Eq => va == vb,
                    CmpOp::Ne => va != vb,
                    _ => {
                        let (Some(x), Some(y)) = (va.as_int(), vb.as_int()) else {
                            return Err(EvalError::mismatch(format!("ordering {va} {} {vb}", op.symbol())));
                        };
                        match op {
                            CmpOp::Lt => x < y,
                            CmpOp::Le => x <= y,
                            CmpOp::Gt => x > y,
                            _ => x >= y,
                        }
                    }
                };
                Ok(Value::Bool(result))
            }
            Expr::Logic(op, a, b) => {
                let lhs = self.truth(a, elem)?;
                let result = match (op, lhs) {
                    (LogicOp::And, false) => false,
                    (LogicOp::Or, true) => true,
                    _ => self.truth(b, elem)?,
                };
                Ok(Value::Bool(result))
            }
            Expr::Not(a) => Ok(Value::Bool(!self.truth(a, elem)?)),
            Expr::InSet(subject, members) => {
                let v = self.eval(subject, elem)?;
                Ok(Value::Bool(members.contains(&v)))
            }
            Expr::Arith(op, a, b) => {
                let (va, vb) = (self.eval(a, elem)?, self.eval(b, elem)?);
                let (Some(x), Some(y)) = (va.as_int(), vb.as_int()) else {
                    return Err(EvalError::mismatch(format!("arith on {va} and {vb}")));
                };
                let r = match op {
                    ArithOp::Add => x.checked_add(y),
                    ArithOp::Sub => x.checked_sub(y),
                };
                r.map(Value::Int)
                    .ok_or_else(|| EvalError::new(EvalErrorKind::Overflow, format!("integer overflow in {expr}")))
            }
            Expr::Record(name, fields) => {
                let fields = fields
                    .iter()
                    .map(|(f, e)| Ok((f.clone(), self.eval(e, elem)?)))
                    .collect::<Result<Vec<_>, EvalError>>()?;
                Ok(Value::Record { name: name.clone(), fields })
            }
            Expr::List(elem_ty, items) => {
                let items = items.iter().map(|e| self.eval(e, elem)).collect::<Result<Vec<_>, _>>()?;
                Ok(Value::List { elem: elem_ty.clone(), items })
            }
            Expr::Call(call) => self.call(call, elem),
        }
    }

    fn truth(&self, expr: &Expr, elem: Option<&Value>) -> Result<bool, EvalError> {
        let v = self.eval(expr, elem)?;
        v.as_bool().ok_or_else(|| EvalError::mismatch(format!("expected Bool, found {v}")))
    }

    fn call(&self, call: &Call, elem: Option<&Value>) -> Result<Value, EvalError> {
        let list = self.eval(&call.args[0], elem)?;
        let Value::List { elem: item_ty, items } = list else {
            return Err(EvalError::mismatch(format!("{} of non-list {list}", call.builtin.name())));
        };
        let matches = |item: &Value| -> Result<bool, EvalError> {
            match &call.filter {
                Some(pred) => self.truth(pred, Some(item)),
                None => Ok(true),
            }
        };

        match call.builtin {
            Builtin::Len => Ok(Value::Int(items.len() as i64)),
            Builtin::Count => {
                let mut n = 0i64;
                for item in &items {
                    if matches(item)? {
                        n += 1;
                    }
                }
                Ok(Value::Int(n))
            }
            Builtin::Exists => {
                for item in &items {
                    if matches(item)? {
                        return Ok(Value::Bool(true));
                    }
                }
                Ok(Value::Bool(false))
            }
            Builtin::Find => {
                let mut found = None;
                for item in items {
                    if matches(&item)? {
                        if found.is_some() {
                            return Err(EvalError::new(EvalErrorKind::FindAmbiguous, "find matched more than one element"));
                        }
                        found = Some(item);
                    }
                }
                found.ok_or_else(|| EvalError::new(EvalErrorKind::FindMiss, "find matched no element"))
            }
            Builtin::Remove => {
                let mut kept = Vec::with_capacity(items.len());
                for item in items {
                    if !matches(&item)? {
                        kept.push(item);
                    }
                }
                Ok(Value::List { elem: item_ty, items: kept })
            }
            Builtin::Update => {
                let (field, rhs) = call.set.as_ref().ok_or_else(|| EvalError::mismatch("update without set"))?;
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    if matches(&item)? {
                        let new_value = self.eval(rhs, Some(&item))?;
                        let Value::Record { name, mut fields } = item else {
                            return Err(EvalError::mismatch("update of a non-record element"));
                        };
                        let slot = fields.iter_mut().find(|(f, _)| f == field).ok_or_else(|| {
                            EvalError::new(EvalErrorKind::NoSuchField, format!("{name} has no field {field}"))
                        })?;
                        slot.1 = new_value;
                        out.push(Value::Record { name, fields });
                    } else {
                        out.push(item);
                    }
                }
                Ok(Value::List { elem: item_ty, items: out })
            }
            Builtin::Add => {
                let extra = self.eval(&call.args[1], elem)?;
                let mut items = items;
                items.push(extra);
                Ok(Value::List { elem: item_ty, items })
            }
            Builtin::Contains => {
                let key = self.eval(&call.args[1], elem)?;
                let found = items.iter().any(|item| match item {
                    Value::Record { .. } => item.field("id") == Some(&key),
                    other => other == &key,
                });
                Ok(Value::Bool(found))
            }
            Builtin::Status => {
                let key = self.eval(&call.args[1], elem)?;
                let mut hits = items.iter().filter(|item| item.field("id") == Some(&key));
                let first = hits
                    .next()
                    .ok_or_else(|| EvalError::new(EvalErrorKind::FindMiss, format!("no element with id {key}")))?;
                if hits.next().is_some() {
                    return Err(EvalError::new(EvalErrorKind::FindAmbiguous, format!("several elements with id {key}")));
                }
                first
                    .field("status")
                    .cloned()
                    .ok_or_else(|| EvalError::new(EvalErrorKind::NoSuchField, format!("{first} has no field status")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr;
    use crate::fixtures;

    fn todo_scope() -> (TypeScope, Decls) {
        let model = fixtures::mytodo();
        let sig = model.action("Remove").unwrap().clone();
        (model.rule_scope(&sig), model.types.clone())
    }

    fn todo(id: &str, status: &str) -> Value {
        Value::Record {
            name: "Todo".into(),
            fields: vec![("id".into(), Value::id(id)), ("status".into(), Value::sym("Status", status))],
        }
    }

    fn todos(items: &[(&str, &str)]) -> Value {
        Value::List { elem: TypeExpr::Record("Todo".into()), items: items.iter().map(|(i, s)| todo(i, s)).collect() }
    }

    fn expr(text: &str) -> Expr {
        let (scope, decls) = todo_scope();
        parse_expr(text, &scope, &decls).unwrap_or_else(|d| panic!("{text}: {d:?}"))
    }

    fn run(text: &str, l: Value) -> Result<Value, EvalError> {
        let env = vec![
            ("s".to_string(), Value::sym("Phase", "S")),
            ("l".to_string(), l),
            ("last".to_string(), Value::none()),
            ("t".to_string(), Value::id("t1")),
        ];
        eval(&expr(text), &env)
    }

    fn type_of(text: &str) -> Result<TypeExpr, Vec<Diagnostic>> {
        let (scope, decls) = todo_scope();
        parse_expr(text, &scope, &decls).and_then(|e| typecheck(&e, &scope, &decls))
    }

    #[test]
    fn membership_types_to_bool() {
        assert_eq!(type_of("s in {N, S}").unwrap(), TypeExpr::Bool);
    }

    #[test]
    fn list_cardinality_guard_types_to_bool() {
        assert_eq!(type_of("len(l) > 1").unwrap(), TypeExpr::Bool);
        assert_eq!(type_of("count(l where .status != done) == 1").unwrap(), TypeExpr::Bool);
    }

    #[test]
    fn arith_on_enum_is_rejected() {
        let (scope, decls) = todo_scope();
        let e = Expr::Arith(ArithOp::Add, Box::new(Expr::var("s")), Box::new(Expr::Lit(Value::Int(1))));
        let diags = typecheck(&e, &scope, &decls).unwrap_err();
        assert!(diags[0].message.contains("arith requires Int"), "{diags:?}");
    }

    #[test]
    fn ordering_requires_int() {
        let (scope, decls) = todo_scope();
        let e = Expr::compare(CmpOp::Lt, Expr::var("s"), Expr::var("s"));
        assert!(typecheck(&e, &scope, &decls).is_err());
    }

    #[test]
    fn set_members_must_share_the_subject_type() {
        assert!(type_of("s in {N, done}").is_err());
    }

    #[test]
    fn count_filters() {
        let v = run("count(l where .status != done)", todos(&[("t1", "done"), ("t2", "notdone")])).unwrap();
        assert_eq!(v, Value::Int(1));
    }

    #[test]
    fn add_appends() {
        let v = run("add(l, {id: t1, status: notdone})", todos(&[])).unwrap();
        assert_eq!(v, todos(&[("t1", "notdone")]));
    }

    #[test]
    fn remove_drops_matches() {
        let v = run("remove(l where .id == t1)", todos(&[("t1", "done"), ("t2", "done")])).unwrap();
        assert_eq!(v, todos(&[("t2", "done")]));
    }

    #[test]
    fn remove_drops_all_matches() {
        let v = run("remove(l where .id == t1)", todos(&[("t1", "done"), ("t2", "done"), ("t1", "notdone")])).unwrap();
        assert_eq!(v, todos(&[("t2", "done")]));
    }

    #[test]
    fn status_of_absent_id_is_find_miss() {
        let err = run("status(l, t9)", todos(&[])).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::FindMiss);
    }

    #[test]
    fn find_with_two_matches_is_ambiguous() {
        let err = run("find(l where .id == t1)", todos(&[("t1", "done"), ("t1", "notdone")])).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::FindAmbiguous);
    }

    #[test]
    fn update_keeps_order() {
        let v = run("update(l where .id == t1 set status := done)", todos(&[("t2", "notdone"), ("t1", "notdone")])).unwrap();
        assert_eq!(v, todos(&[("t2", "notdone"), ("t1", "done")]));
    }

    #[test]
    fn contains_matches_on_id_field() {
        assert_eq!(run("contains(l, t1)", todos(&[("t1", "done")])).unwrap(), Value::Bool(true));
        assert_eq!(run("contains(l, t2)", todos(&[("t1", "done")])).unwrap(), Value::Bool(false));
    }

    #[test]
    fn exists_and_find() {
        let l = todos(&[("t1", "done"), ("t2", "notdone")]);
        assert_eq!(run("exists(l where .status == notdone)", l.clone()).unwrap(), Value::Bool(true));
        assert_eq!(run("find(l where .status == notdone).id", l).unwrap(), Value::id("t2"));
    }

    #[test]
    fn and_short_circuits_past_a_failing_lookup() {
        let v = run("len(l) > 0 and status(l, t) != done", todos(&[])).unwrap();
        assert_eq!(v, Value::Bool(false));
        let v = run("len(l) == 0 or status(l, t) != done", todos(&[])).unwrap();
        assert_eq!(v, Value::Bool(true));
    }

    #[test]
    fn overflow_is_an_eval_error() {
        let e = Expr::Arith(ArithOp::Add, Box::new(Expr::Lit(Value::Int(i64::MAX))), Box::new(Expr::Lit(Value::Int(1))));
        let env: Vec<(String, Value)> = Vec::new();
        assert_eq!(eval(&e, &env).unwrap_err().kind, EvalErrorKind::Overflow);
    }

    #[test]
    fn display_round_trips_through_the_parser() {
        for text in [
            "s not in {Phase.N} and len(l) > 1",
            "not (s == Phase.S or len(l) == 0)",
            "count(l where .status != Status.done) == 1",
            "update(l where .id == t set status := Status.done)",
            "len(l) - (1 - 2) >= -3",
            "find(l where it.id == t).status == Status.notdone",
        ] {
            let e = expr(text);
            assert_eq!(expr(&e.to_string()), e, "{text} printed as {e}");
        }
    }

    #[test]
    fn layered_bindings_shadow() {
        let params = vec![("x".to_string(), Value::Int(1))];
        let state = vec![("x".to_string(), Value::Int(2)), ("y".to_string(), Value::Int(3))];
        let env = Layered(params.as_slice(), state.as_slice());
        assert_eq!(env.lookup("x"), Some(&Value::Int(1)));
        assert_eq!(env.lookup("y"), Some(&Value::Int(3)));
    }
}
