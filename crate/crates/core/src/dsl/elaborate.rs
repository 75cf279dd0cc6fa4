//! Name resolution and typing of the raw syntax tree into a [`Model`].
//!
//! Bare identifiers resolve, in order, to: a variable or parameter in scope;
//! a member of the enum the context expects; an id token when the context
//! expects an id; the unique enum declaring that member.

use super::ast::*;
use crate::diag::{codes, Diagnostic, Span};
use crate::expr::{eval, typecheck_in, Builtin, Call, Expr, TypeScope};
use crate::model::{ActionSig, Model, Rule, SourceMap};
use crate::value::{Decls, EnumDecl, RecordDecl, TypeExpr, Value};

pub struct Elaborator {
    pub diags: Vec<Diagnostic>,
    decls: Decls,
}

#[derive(Clone, Copy)]
struct Ctx<'a> {
    scope: &'a TypeScope,
    elem: Option<&'a TypeExpr>,
}

impl Elaborator {
    pub fn new() -> Self {
        Elaborator { diags: Vec::new(), decls: Decls::default() }
    }

    pub fn with_decls(decls: Decls) -> Self {
        Elaborator { diags: Vec::new(), decls }
    }

    /// Resolves and types a standalone expression against `scope`.
    pub fn standalone(&mut self, raw: &RawExpr, scope: &TypeScope) -> Option<Expr> {
        self.expr(raw, None, Ctx { scope, elem: None })
    }

    fn error(&mut self, code: &'static str, span: &Span, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, span.clone(), message));
    }

    pub fn model(&mut self, raw: RawModel) -> Model {
        let mut model = Model { name: raw.name.name.clone(), ..Model::default() };
        let mut source = SourceMap { model: raw.name.span.clone(), ..SourceMap::default() };

        // Type declarations first: every other declaration may refer to them.
        let mut enum_names: Vec<&str> = Vec::new();
        let mut record_names: Vec<&str> = Vec::new();
        for (decl, _) in &raw.decls {
            match decl {
                RawDecl::Enum { name, .. } => enum_names.push(&name.name),
                RawDecl::Record { name, .. } => record_names.push(&name.name),
                _ => {}
            }
        }
        for (decl, span) in &raw.decls {
            if let RawDecl::Enum { name, members } = decl {
                if record_names.contains(&name.name.as_str()) {
                    self.error(codes::DUPLICATE, &name.span, format!("{} is declared as both an enum and a record", name.name));
                }
                self.decls.enums.push(EnumDecl { name: name.name.clone(), members: members.iter().map(|m| m.name.clone()).collect() });
                source.enums.push(span.clone());
            }
        }
        for (decl, span) in &raw.decls {
            if let RawDecl::Record { name, fields } = decl {
                let fields = fields
                    .iter()
                    .filter_map(|(f, t)| Some((f.name.clone(), self.type_expr(t, &enum_names, &record_names)?)))
                    .collect();
                self.decls.records.push(RecordDecl { name: name.name.clone(), fields });
                source.records.push(span.clone());
            }
        }

        let mut observe_seen = false;
        for (decl, span) in &raw.decls {
            match decl {
                RawDecl::Meta { key, value } => model.meta.push((key.name.clone(), value.clone())),
                RawDecl::Var { name, ty } => {
                    if let Some(ty) = self.type_expr(ty, &enum_names, &record_names) {
                        model.state_vars.push((name.name.clone(), ty));
                        source.state_vars.push(span.clone());
                    }
                }
                RawDecl::Action { name, params } => {
                    let params = params
                        .iter()
                        .filter_map(|(p, t)| Some((p.name.clone(), self.type_expr(t, &enum_names, &record_names)?)))
                        .collect();
                    model.actions.push(ActionSig { name: name.name.clone(), params });
                    source.actions.push(span.clone());
                }
                _ => {}
            }
        }

        let state_scope: TypeScope = model.state_vars.iter().cloned().collect();
        for (decl, span) in &raw.decls {
            match decl {
                RawDecl::Init { var, value } => {
                    let hint = model.var_type(&var.name).cloned();
                    // State variables resolve here so that a non-constant init
                    // is reported as such rather than as an unknown name.
                    let ctx = Ctx { scope: &state_scope, elem: None };
                    if let Some(e) = self.expr(value, hint.as_ref(), ctx) {
                        model.init.push((var.name.clone(), e));
                        source.init.push(span.clone());
                    }
                }
                RawDecl::Rule { label, action, guard, updates, impls } => {
                    let Some(sig) = model.action(&action.name).cloned() else {
                        self.error(codes::UNKNOWN_ACTION, &action.span, format!("unknown action {}", action.name));
                        continue;
                    };
                    let scope = model.rule_scope(&sig);
                    let ctx = Ctx { scope: &scope, elem: None };
                    let guard = match guard {
                        Some(g) => self.expr(g, Some(&TypeExpr::Bool), ctx),
                        None => Some(Expr::truth()),
                    };
                    let mut elaborated = Vec::new();
                    for (var, rhs) in updates {
                        let hint = model.var_type(&var.name).cloned();
                        if hint.is_none() {
                            self.error(codes::BAD_UPDATE, &var.span, format!("rule {} updates undeclared variable {}", label.name, var.name));
                            continue;
                        }
                        if let Some(e) = self.expr(rhs, hint.as_ref(), ctx) {
                            elaborated.push((var.name.clone(), e));
                        }
                    }
                    if impls.len() > 1 {
                        self.error(codes::BAD_ANNOTATION, &impls[1].1, format!("rule {} has more than one @impl link", label.name));
                    }
                    if let Some(guard) = guard {
                        model.rules.push(Rule {
                            label: label.name.clone(),
                            action: action.name.clone(),
                            guard,
                            updates: elaborated,
                            impl_link: impls.first().map(|(link, _)| link.clone()),
                        });
                        source.rules.push(span.clone());
                    }
                }
                RawDecl::Observe { outputs } => {
                    if observe_seen {
                        self.error(codes::DUPLICATE, span, "duplicate observe clause");
                        continue;
                    }
                    observe_seen = true;
                    source.observe = span.clone();
                    let ctx = Ctx { scope: &state_scope, elem: None };
                    for (name, e) in outputs {
                        if let Some(e) = self.expr(e, None, ctx) {
                            model.observe.push((name.name.clone(), e));
                        }
                    }
                }
                RawDecl::Invariant { name, expr } => {
                    let ctx = Ctx { scope: &state_scope, elem: None };
                    if let Some(e) = self.expr(expr, Some(&TypeExpr::Bool), ctx) {
                        model.invariants.push((name.name.clone(), e));
                        source.invariants.push(span.clone());
                    }
                }
                _ => {}
            }
        }

        model.types = std::mem::take(&mut self.decls);
        model.source = source;
        model
    }

    fn type_expr(&mut self, raw: &RawType, enum_names: &[&str], record_names: &[&str]) -> Option<TypeExpr> {
        match &raw.kind {
            RawTypeKind::Bool => Some(TypeExpr::Bool),
            RawTypeKind::Int => Some(TypeExpr::Int),
            RawTypeKind::Id => Some(TypeExpr::Id),
            RawTypeKind::Named(n) => {
                if enum_names.contains(&n.as_str()) {
                    Some(TypeExpr::Enum(n.clone()))
                } else if record_names.contains(&n.as_str()) {
                    Some(TypeExpr::Record(n.clone()))
                } else {
                    self.error(codes::UNKNOWN_TYPE, &raw.span, format!("unknown type {n}"));
                    None
                }
            }
            RawTypeKind::List(inner) => {
                let inner_ty = self.type_expr(inner, enum_names, record_names)?;
                if matches!(inner_ty, TypeExpr::List(_)) {
                    self.error(codes::INVALID_TYPE, &raw.span, "lists of lists are not supported");
                    return None;
                }
                Some(TypeExpr::list_of(inner_ty))
            }
        }
    }

    /// True if the expression's meaning depends on the type its context expects.
    fn needs_hint(raw: &RawExpr, ctx: Ctx) -> bool {
        match &raw.kind {
            RawExprKind::Name(n) => !ctx.scope.contains_key(n),
            RawExprKind::List(items) => items.is_empty(),
            RawExprKind::Record(_) => true,
            _ => false,
        }
    }

    fn expr(&mut self, raw: &RawExpr, hint: Option<&TypeExpr>, ctx: Ctx) -> Option<Expr> {
        let built = self.build(raw, hint, ctx)?;
        match typecheck_in(&built, ctx.scope, &self.decls, ctx.elem) {
            Ok(_) => Some(built),
            Err(diags) => {
                for d in diags {
                    self.diags.push(Diagnostic { span: raw.span.clone(), ..d });
                }
                None
            }
        }
    }

    fn type_of(&self, e: &Expr, ctx: Ctx) -> Option<TypeExpr> {
        typecheck_in(e, ctx.scope, &self.decls, ctx.elem).ok()
    }

    fn build(&mut self, raw: &RawExpr, hint: Option<&TypeExpr>, ctx: Ctx) -> Option<Expr> {
        let span = &raw.span;
        match &raw.kind {
            RawExprKind::Int(n) => Some(Expr::Lit(Value::Int(*n))),
            RawExprKind::Bool(b) => Some(Expr::Lit(Value::Bool(*b))),
            RawExprKind::None => Some(Expr::Lit(Value::none())),
            RawExprKind::Elem => {
                if ctx.elem.is_none() {
                    self.error(codes::BAD_WHERE, span, "`it` may only be used inside a where clause");
                    return None;
                }
                Some(Expr::Elem)
            }
            RawExprKind::ElemField(field) => {
                if ctx.elem.is_none() {
                    self.error(codes::BAD_WHERE, span, format!("`.{}` may only be used inside a where clause", field.name));
                    return None;
                }
                Some(Expr::field(Expr::Elem, &field.name))
            }
            RawExprKind::Name(n) => self.resolve_name(n, span, hint, ctx),
            RawExprKind::Dotted(base, field) => {
                if let RawExprKind::Name(n) = &base.kind {
                    if let Some(decl) = self.decls.enum_decl(n) {
                        if decl.members.contains(&field.name) {
                            return Some(Expr::Lit(Value::sym(n, &field.name)));
                        }
                        if !ctx.scope.contains_key(n) {
                            self.error(codes::UNKNOWN_MEMBER, &field.span, format!("enum {n} has no member {}", field.name));
                            return None;
                        }
                    }
                }
                let base = self.expr(base, None, ctx)?;
                Some(Expr::field(base, &field.name))
            }
            RawExprKind::Compare(op, a, b) => {
                let (a, b) = self.pair(a, b, None, ctx)?;
                Some(Expr::compare(*op, a, b))
            }
            RawExprKind::Logic(op, a, b) => {
                let a = self.expr(a, Some(&TypeExpr::Bool), ctx);
                let b = self.expr(b, Some(&TypeExpr::Bool), ctx);
                Some(Expr::Logic(*op, Box::new(a?), Box::new(b?)))
            }
            RawExprKind::Not(a) => Some(Expr::not(self.expr(a, Some(&TypeExpr::Bool), ctx)?)),
            RawExprKind::In { subject, members, negated } => {
                let subject = self.expr(subject, None, ctx)?;
                let subject_ty = self.type_of(&subject, ctx)?;
                let mut values = Vec::with_capacity(members.len());
                let mut ok = true;
                for m in members {
                    let Some(e) = self.expr(m, Some(&subject_ty), ctx) else {
                        ok = false;
                        continue;
                    };
                    if !e.is_constant() {
                        self.error(codes::TYPE_MISMATCH, &m.span, "set members must be literals");
                        ok = false;
                        continue;
                    }
                    match eval(&e, &Vec::new()) {
                        Ok(v) => values.push(v),
                        Err(err) => {
                            self.error(codes::TYPE_MISMATCH, &m.span, err.detail);
                            ok = false;
                        }
                    }
                }
                if !ok {
                    return None;
                }
                let in_set = Expr::InSet(Box::new(subject), values);
                Some(if *negated { Expr::not(in_set) } else { in_set })
            }
            RawExprKind::Arith(op, a, b) => {
                let a = self.expr(a, Some(&TypeExpr::Int), ctx);
                let b = self.expr(b, Some(&TypeExpr::Int), ctx);
                Some(Expr::Arith(*op, Box::new(a?), Box::new(b?)))
            }
            RawExprKind::Record(fields) => self.record(fields, span, hint, ctx),
            RawExprKind::List(items) => {
                let elem_ty = match hint.and_then(TypeExpr::list_elem) {
                    Some(t) => t.clone(),
                    None => {
                        let Some(first) = items.first() else {
                            self.error(codes::TYPE_MISMATCH, span, "cannot infer the element type of an empty list here");
                            return None;
                        };
                        let e = self.expr(first, None, ctx)?;
                        self.type_of(&e, ctx)?
                    }
                };
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.expr(item, Some(&elem_ty), ctx));
                }
                Some(Expr::List(elem_ty, out.into_iter().collect::<Option<Vec<_>>>()?))
            }
            RawExprKind::Call { name, args, filter, set } => self.call(name, args, filter.as_deref(), set.as_ref(), span, ctx),
        }
    }

    fn resolve_name(&mut self, n: &str, span: &Span, hint: Option<&TypeExpr>, ctx: Ctx) -> Option<Expr> {
        if ctx.scope.contains_key(n) {
            return Some(Expr::var(n));
        }
        match hint {
            Some(TypeExpr::Enum(e)) if self.decls.enum_decl(e).is_some_and(|d| d.members.iter().any(|m| m == n)) => {
                return Some(Expr::Lit(Value::sym(e, n)));
            }
            Some(TypeExpr::Id) => return Some(Expr::Lit(Value::id(n))),
            _ => {}
        }
        let owners: Vec<String> = self.decls.enums_with_member(n).map(|e| e.name.clone()).collect();
        match owners.as_slice() {
            [only] => Some(Expr::Lit(Value::sym(only, n))),
            [] => {
                self.error(codes::UNKNOWN_NAME, span, format!("unknown name {n}"));
                None
            }
            many => {
                let d = Diagnostic::error(codes::UNKNOWN_MEMBER, span.clone(), format!("ambiguous enum member {n}"))
                    .with_hint(format!("qualify it, e.g. {}.{n}", many[0]));
                self.diags.push(d);
                None
            }
        }
    }

    /// Elaborates two operands that must share a type, letting a
    /// self-describing side supply the hint for a context-dependent one.
    fn pair(&mut self, a: &RawExpr, b: &RawExpr, hint: Option<&TypeExpr>, ctx: Ctx) -> Option<(Expr, Expr)> {
        if Self::needs_hint(a, ctx) && !Self::needs_hint(b, ctx) {
            let eb = self.expr(b, hint, ctx)?;
            let tb = self.type_of(&eb, ctx);
            let ea = self.expr(a, tb.as_ref(), ctx)?;
            Some((ea, eb))
        } else {
            let ea = self.expr(a, hint, ctx)?;
            let ta = self.type_of(&ea, ctx);
            let eb = self.expr(b, ta.as_ref(), ctx)?;
            Some((ea, eb))
        }
    }

    fn record(&mut self, fields: &[(Ident, RawExpr)], span: &Span, hint: Option<&TypeExpr>, ctx: Ctx) -> Option<Expr> {
        let mut names: Vec<&str> = fields.iter().map(|(f, _)| f.name.as_str()).collect();
        names.sort_unstable();
        let decl = match hint {
            Some(TypeExpr::Record(r)) => self.decls.record_decl(r).cloned(),
            _ => {
                let candidates: Vec<&RecordDecl> = self
                    .decls
                    .records
                    .iter()
                    .filter(|r| {
                        let mut want: Vec<&str> = r.fields.iter().map(|(f, _)| f.as_str()).collect();
                        want.sort_unstable();
                        want == names
                    })
                    .collect();
                match candidates.as_slice() {
                    [only] => Some((*only).clone()),
                    [] => None,
                    _ => {
                        self.error(codes::TYPE_MISMATCH, span, "record literal matches several record types");
                        return None;
                    }
                }
            }
        };
        let Some(decl) = decl else {
            self.error(codes::UNKNOWN_TYPE, span, format!("no record type has fields {{{}}}", names.join(", ")));
            return None;
        };
        for (f, _) in fields {
            if decl.field_type(&f.name).is_none() {
                self.error(codes::UNKNOWN_FIELD, &f.span, format!("record {} has no field {}", decl.name, f.name));
                return None;
            }
        }
        let mut out = Vec::with_capacity(decl.fields.len());
        let mut ok = true;
        for (fname, fty) in &decl.fields {
            let given: Vec<&(Ident, RawExpr)> = fields.iter().filter(|(f, _)| &f.name == fname).collect();
            match given.as_slice() {
                [(_, e)] => match self.expr(e, Some(fty), ctx) {
                    Some(e) => out.push((fname.clone(), e)),
                    None => ok = false,
                },
                [] => {
                    self.error(codes::UNKNOWN_FIELD, span, format!("record {} is missing field {fname}", decl.name));
                    ok = false;
                }
                [_, (dup, _), ..] => {
                    self.error(codes::DUPLICATE, &dup.span, format!("field {fname} given twice"));
                    ok = false;
                }
            }
        }
        ok.then(|| Expr::Record(decl.name.clone(), out))
    }

    fn call(
        &mut self,
        name: &Ident,
        args: &[RawExpr],
        filter: Option<&RawExpr>,
        set: Option<&(Ident, Box<RawExpr>)>,
        span: &Span,
        ctx: Ctx,
    ) -> Option<Expr> {
        let Some(builtin) = Builtin::from_name(&name.name) else {
            let known: Vec<&str> = Builtin::ALL.iter().map(|b| b.name()).collect();
            let d = Diagnostic::error(codes::BAD_CALL, name.span.clone(), format!("unknown function {}", name.name))
                .with_hint(format!("available: {}", known.join(", ")));
            self.diags.push(d);
            return None;
        };
        if args.len() != builtin.arity() {
            self.error(codes::BAD_CALL, span, format!("{} takes {} argument(s), found {}", name.name, builtin.arity(), args.len()));
            return None;
        }
        let list = self.expr(&args[0], None, ctx)?;
        let list_ty = self.type_of(&list, ctx)?;
        let Some(elem_ty) = list_ty.list_elem().cloned() else {
            self.error(codes::TYPE_MISMATCH, &args[0].span, format!("{} expects a list, found {list_ty}", name.name));
            return None;
        };
        let inner = Ctx { scope: ctx.scope, elem: Some(&elem_ty) };

        let filter = match filter {
            Some(p) => Some(Box::new(self.expr(p, Some(&TypeExpr::Bool), inner)?)),
            None => None,
        };
        let set = match set {
            Some((field, e)) => {
                let fty = match &elem_ty {
                    TypeExpr::Record(r) => self.decls.record_decl(r).and_then(|d| d.field_type(&field.name)).cloned(),
                    _ => None,
                };
                let Some(fty) = fty else {
                    self.error(codes::UNKNOWN_FIELD, &field.span, format!("elements of type {elem_ty} have no field {}", field.name));
                    return None;
                };
                Some((field.name.clone(), Box::new(self.expr(e, Some(&fty), inner)?)))
            }
            None => None,
        };

        let mut out_args = vec![list];
        if let Some(second) = args.get(1) {
            let record_id = match &elem_ty {
                TypeExpr::Record(r) => self.decls.record_decl(r).and_then(|d| d.field_type("id")).cloned(),
                _ => None,
            };
            let hint = match builtin {
                Builtin::Add => Some(elem_ty.clone()),
                Builtin::Contains => record_id.or(Some(elem_ty.clone())),
                _ => record_id,
            };
            out_args.push(self.expr(second, hint.as_ref(), ctx)?);
        }
        Some(Expr::Call(Call { builtin, args: out_args, filter, set }))
    }
}

impl Default for Elaborator {
    fn default() -> Self {
        Self::new()
    }
}
