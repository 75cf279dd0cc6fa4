//! The `.tsm` modeling language: parsing, static checking and canonical formatting.
//!
//! ```text
//! model TrafficLight
//! enum Color { Black, Red, Yellow, Green }
//! var s: Color
//! init s := Color.Black
//! action timerflip
//! observe (y: s)
//! rule r1: on timerflip when s == Color.Red => s := Color.Yellow
//! ```

mod ast;
mod elaborate;
mod lexer;
mod parser;
mod values;

use std::fmt::Write;

use crate::diag::{codes, Diagnostic};
use crate::expr::{Expr, TypeScope};
use crate::value::Decls;
use crate::model::{validate_model, Model};

pub use parser::{is_keyword, KEYWORDS};
pub use values::parse_value;

/// Parses and checks a model. Succeeds iff there are no errors; warnings are
/// available from [`validate_model`].
pub fn parse(source: &str) -> Result<Model, Vec<Diagnostic>> {
    parse_source("<input>", source)
}

/// Like [`parse`], labelling spans with `file`.
pub fn parse_source(file: &str, source: &str) -> Result<Model, Vec<Diagnostic>> {
    let (tokens, mut diags) = lexer::lex(file, source);
    let mut parser = parser::Parser::new(tokens);
    let raw = parser.parse_model();
    diags.append(&mut parser.diags);
    let Some(raw) = raw else {
        return Err(diags);
    };
    let mut elab = elaborate::Elaborator::new();
    let model = elab.model(raw);
    diags.append(&mut elab.diags);
    if !diags.is_empty() {
        return Err(diags);
    }
    let errors: Vec<Diagnostic> = validate_model(&model).into_iter().filter(Diagnostic::is_error).collect();
    if errors.is_empty() {
        Ok(model)
    } else {
        Err(errors)
    }
}

/// Parses one expression over variables typed by `scope`.
pub fn parse_expr(source: &str, scope: &TypeScope, decls: &Decls) -> Result<Expr, Vec<Diagnostic>> {
    let (tokens, mut diags) = lexer::lex("<expr>", source);
    let mut parser = parser::Parser::new(tokens);
    let raw = parser.expr().ok();
    diags.append(&mut parser.diags);
    if raw.is_some() && !parser.at_eof() {
        let (found, span) = parser.describe_current();
        diags.push(Diagnostic::error(codes::SYNTAX, span, format!("expected end of expression, found {found}")));
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let mut elab = elaborate::Elaborator::with_decls(decls.clone());
    match elab.standalone(&raw.expect("parsed"), scope) {
        Some(e) if elab.diags.is_empty() => Ok(e),
        _ => Err(elab.diags),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical rendering of a model. Whitespace and comments are not
/// preserved; declaration order within each kind is.
pub fn format_model(model: &Model) -> String {
    let mut sections: Vec<String> = Vec::new();
    let mut push = |lines: Vec<String>| {
        if !lines.is_empty() {
            sections.push(lines.join("\n"));
        }
    };

    push(model.meta.iter().map(|(k, v)| format!("meta {k}: {}", quote(v))).collect());
    push(model.types.enums.iter().map(|e| format!("enum {} {{ {} }}", e.name, e.members.join(", "))).collect());
    push(
        model
            .types
            .records
            .iter()
            .map(|r| {
                let fields: Vec<String> = r.fields.iter().map(|(f, t)| format!("{f}: {t}")).collect();
                format!("record {} {{ {} }}", r.name, fields.join(", "))
            })
            .collect(),
    );
    push(model.state_vars.iter().map(|(v, t)| format!("var {v}: {t}")).collect());
    push(model.init.iter().map(|(v, e)| format!("init {v} := {e}")).collect());
    push(
        model
            .actions
            .iter()
            .map(|a| {
                if a.params.is_empty() {
                    format!("action {}", a.name)
                } else {
                    let params: Vec<String> = a.params.iter().map(|(p, t)| format!("{p}: {t}")).collect();
                    format!("action {}({})", a.name, params.join(", "))
                }
            })
            .collect(),
    );
    if !model.observe.is_empty() {
        let outputs: Vec<String> = model.observe.iter().map(|(n, e)| format!("{n}: {e}")).collect();
        push(vec![format!("observe ({})", outputs.join(", "))]);
    }
    push(model.rules.iter().map(format_rule).collect());
    push(model.invariants.iter().map(|(n, e)| format!("invariant {n}: {e}")).collect());

    let mut out = format!("model {}\n", model.name);
    for s in sections {
        let _ = write!(out, "\n{s}\n");
    }
    out
}

pub fn format_rule(rule: &crate::model::Rule) -> String {
    let mut line = format!("rule {}: on {}", rule.label, rule.action);
    if rule.guard != crate::expr::Expr::truth() {
        let _ = write!(line, " when {}", rule.guard);
    }
    let updates: Vec<String> = rule.updates.iter().map(|(v, e)| format!("{v} := {e}")).collect();
    let _ = write!(line, " => {}", updates.join(", "));
    if let Some(link) = &rule.impl_link {
        let _ = write!(line, " @impl({})", quote(link));
    }
    line
}
