//! Recursive-descent parser for `.tsm` sources.
//!
//! On a syntax error the parser records a diagnostic and skips ahead to the
//! next declaration keyword, so one run reports every broken declaration.

use super::ast::*;
use super::lexer::{Tok, Token};
use crate::diag::{codes, Diagnostic, Span};
use crate::expr::{ArithOp, CmpOp, LogicOp};

pub const KEYWORDS: &[&str] = &[
    "model", "meta", "enum", "record", "var", "init", "action", "rule", "on", "when", "observe", "invariant", "true",
    "false", "none", "and", "or", "not", "in", "it", "where", "set", "list", "bool", "int", "id",
];

const DECL_KEYWORDS: &[&str] = &["meta", "enum", "record", "var", "init", "action", "rule", "observe", "invariant", "model"];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Marker for an already-reported syntax error.
pub(super) struct Bail;

pub(super) type PResult<T> = Result<T, Bail>;

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    pub diags: Vec<Diagnostic>,
    depth: usize,
    operators: usize,
}

const MAX_DEPTH: usize = 64;
/// Binary operators allowed in one top-level expression.
const MAX_OPERATORS: usize = 256;

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0, diags: Vec::new(), depth: 0, operators: 0 }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span.clone()
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let found = self.peek().describe();
        let span = self.span();
        self.diags.push(Diagnostic::error(codes::SYNTAX, span, format!("expected {expected}, found {found}")));
        Err(Bail)
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.at(&tok) {
            Ok(self.bump().span)
        } else {
            self.fail(&tok.describe())
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Span> {
        if self.at_word(w) {
            Ok(self.bump().span)
        } else {
            self.fail(&format!("`{w}`"))
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Word(w) if !is_keyword(&w) => {
                let span = self.bump().span;
                Ok(Ident { name: w, span })
            }
            Tok::Word(w) => {
                let span = self.span();
                self.diags.push(Diagnostic::error(codes::SYNTAX, span, format!("`{w}` is a reserved keyword and cannot be used as {what}")));
                Err(Bail)
            }
            _ => self.fail(what),
        }
    }

    /// Field names may be keywords (`id`, `set`, ...).
    fn field_name(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Word(w) => {
                let span = self.bump().span;
                Ok(Ident { name: w, span })
            }
            _ => self.fail("a field name"),
        }
    }

    fn sync_to_decl(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Word(w) if DECL_KEYWORDS.contains(&w.as_str()) => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    pub(super) fn at_eof(&self) -> bool {
        self.at(&Tok::Eof)
    }

    pub(super) fn describe_current(&self) -> (String, Span) {
        (self.peek().describe(), self.span())
    }

    pub fn parse_model(&mut self) -> Option<RawModel> {
        if !self.at_word("model") {
            let span = self.span();
            self.diags.push(Diagnostic::error(codes::MODEL_HEADER, span, "source must start with `model <Name>`"));
            self.sync_to_decl();
        }
        let mut name = None;
        if self.eat_word("model") {
            name = self.ident("a model name").ok();
        }
        let mut decls = Vec::new();
        while !self.at(&Tok::Eof) {
            if self.at_word("model") {
                let span = self.span();
                self.diags.push(Diagnostic::error(codes::MODEL_HEADER, span, "only one model per file is supported"));
                self.bump();
                self.sync_to_decl();
                continue;
            }
            let start = self.span();
            let start_pos = self.pos;
            self.depth = 0;
            match self.decl() {
                Ok(d) => decls.push((d, start.join(&self.prev_span()))),
                Err(Bail) => {
                    if self.pos == start_pos {
                        self.bump();
                    }
                    self.sync_to_decl();
                }
            }
        }
        name.map(|name| RawModel { name, decls })
    }

    fn decl(&mut self) -> PResult<RawDecl> {
        let Tok::Word(kw) = self.peek().clone() else {
            return self.fail("a declaration");
        };
        match kw.as_str() {
            "meta" => {
                self.bump();
                let key = self.field_name()?;
                self.expect(Tok::Colon)?;
                match self.peek().clone() {
                    Tok::Str(value) => {
                        self.bump();
                        Ok(RawDecl::Meta { key, value })
                    }
                    _ => self.fail("a string"),
                }
            }
            "enum" => {
                self.bump();
                let name = self.ident("an enum name")?;
                self.expect(Tok::LBrace)?;
                let mut members = vec![self.ident("an enum member")?];
                while self.eat(&Tok::Comma) {
                    members.push(self.ident("an enum member")?);
                }
                self.expect(Tok::RBrace)?;
                Ok(RawDecl::Enum { name, members })
            }
            "record" => {
                self.bump();
                let name = self.ident("a record name")?;
                self.expect(Tok::LBrace)?;
                let mut fields = vec![self.typed_field(true)?];
                while self.eat(&Tok::Comma) {
                    fields.push(self.typed_field(true)?);
                }
                self.expect(Tok::RBrace)?;
                Ok(RawDecl::Record { name, fields })
            }
            "var" => {
                self.bump();
                let name = self.ident("a variable name")?;
                self.expect(Tok::Colon)?;
                let ty = self.type_expr()?;
                Ok(RawDecl::Var { name, ty })
            }
            "init" => {
                self.bump();
                let var = self.ident("a variable name")?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                Ok(RawDecl::Init { var, value })
            }
            "action" => {
                self.bump();
                let name = self.ident("an action name")?;
                let mut params = Vec::new();
                if self.eat(&Tok::LParen) {
                    params.push(self.typed_field(false)?);
                    while self.eat(&Tok::Comma) {
                        params.push(self.typed_field(false)?);
                    }
                    self.expect(Tok::RParen)?;
                }
                Ok(RawDecl::Action { name, params })
            }
            "rule" => {
                self.bump();
                let label = self.ident("a rule label")?;
                self.expect(Tok::Colon)?;
                self.expect_word("on")?;
                let action = self.ident("an action name")?;
                let guard = if self.eat_word("when") { Some(self.expr()?) } else { None };
                self.expect(Tok::Arrow)?;
                let mut updates = vec![self.assign()?];
                while self.eat(&Tok::Comma) {
                    updates.push(self.assign()?);
                }
                let mut impls = Vec::new();
                while self.at(&Tok::At) {
                    let start = self.bump().span;
                    let ann = self.field_name()?;
                    if ann.name != "impl" {
                        self.diags.push(Diagnostic::error(codes::BAD_ANNOTATION, ann.span, format!("unknown annotation @{}", ann.name)));
                        return Err(Bail);
                    }
                    self.expect(Tok::LParen)?;
                    let Tok::Str(link) = self.peek().clone() else {
                        return self.fail("a string");
                    };
                    self.bump();
                    let end = self.expect(Tok::RParen)?;
                    impls.push((link, start.join(&end)));
                }
                Ok(RawDecl::Rule { label, action, guard, updates, impls })
            }
            "observe" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let mut outputs = vec![self.output()?];
                while self.eat(&Tok::Comma) {
                    outputs.push(self.output()?);
                }
                self.expect(Tok::RParen)?;
                Ok(RawDecl::Observe { outputs })
            }
            "invariant" => {
                self.bump();
                let name = self.ident("an invariant name")?;
                self.expect(Tok::Colon)?;
                let expr = self.expr()?;
                Ok(RawDecl::Invariant { name, expr })
            }
            _ => self.fail("a declaration (enum, record, var, init, action, rule, observe, invariant, meta)"),
        }
    }

    fn typed_field(&mut self, keyword_ok: bool) -> PResult<(Ident, RawType)> {
        let name = if keyword_ok { self.field_name()? } else { self.ident("a parameter name")? };
        self.expect(Tok::Colon)?;
        Ok((name, self.type_expr()?))
    }

    fn output(&mut self) -> PResult<(Ident, RawExpr)> {
        let name = self.field_name()?;
        self.expect(Tok::Colon)?;
        Ok((name, self.expr()?))
    }

    fn assign(&mut self) -> PResult<(Ident, RawExpr)> {
        let name = self.ident("a variable name")?;
        self.expect(Tok::Assign)?;
        Ok((name, self.expr()?))
    }

    fn type_expr(&mut self) -> PResult<RawType> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Word(w) if w == "bool" => {
                self.bump();
                RawTypeKind::Bool
            }
            Tok::Word(w) if w == "int" => {
                self.bump();
                RawTypeKind::Int
            }
            Tok::Word(w) if w == "id" => {
                self.bump();
                RawTypeKind::Id
            }
            Tok::Word(w) if w == "list" => {
                self.bump();
                self.expect(Tok::Lt)?;
                let inner = self.type_expr()?;
                self.expect(Tok::Gt)?;
                RawTypeKind::List(Box::new(inner))
            }
            Tok::Word(w) if !is_keyword(&w) => {
                self.bump();
                RawTypeKind::Named(w)
            }
            _ => return self.fail("a type"),
        };
        Ok(RawType { kind, span: start.join(&self.prev_span()) })
    }

    // Expressions, loosest first: or, and, not, compare/in, add/sub, postfix, primary.

    pub(super) fn expr(&mut self) -> PResult<RawExpr> {
        if self.depth == 0 {
            self.operators = 0;
        }
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            self.depth -= 1;
            let span = self.span();
            self.diags.push(Diagnostic::error(codes::SYNTAX, span, "expression nested too deeply"));
            return Err(Bail);
        }
        let r = self.or_expr();
        self.depth -= 1;
        r
    }

    fn or_expr(&mut self) -> PResult<RawExpr> {
        let mut lhs = self.and_expr()?;
        while self.eat_word("or") {
            let rhs = self.and_expr()?;
            lhs = self.binary(lhs, rhs, |a, b| RawExprKind::Logic(LogicOp::Or, a, b))?;
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<RawExpr> {
        let mut lhs = self.not_expr()?;
        while self.eat_word("and") {
            let rhs = self.not_expr()?;
            lhs = self.binary(lhs, rhs, |a, b| RawExprKind::Logic(LogicOp::And, a, b))?;
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<RawExpr> {
        if self.at_word("not") {
            let start = self.bump().span;
            self.depth += 1;
            if self.depth > MAX_DEPTH {
                let span = self.span();
                self.diags.push(Diagnostic::error(codes::SYNTAX, span, "expression nested too deeply"));
                return Err(Bail);
            }
            let inner = self.not_expr();
            self.depth -= 1;
            let inner = inner?;
            let span = start.join(&inner.span);
            return Ok(RawExpr { kind: RawExprKind::Not(Box::new(inner)), span });
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<RawExpr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::EqEq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Gt => Some(CmpOp::Gt),
            Tok::Ge => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.add_expr()?;
            return self.binary(lhs, rhs, |a, b| RawExprKind::Compare(op, a, b));
        }
        let negated = if self.at_word("not") && matches!(self.peek_at(1), Tok::Word(w) if w == "in") {
            self.bump();
            true
        } else {
            false
        };
        if self.eat_word("in") {
            self.expect(Tok::LBrace)?;
            let mut members = vec![self.add_expr()?];
            while self.eat(&Tok::Comma) {
                members.push(self.add_expr()?);
            }
            let end = self.expect(Tok::RBrace)?;
            let span = lhs.span.join(&end);
            return Ok(RawExpr { kind: RawExprKind::In { subject: Box::new(lhs), members, negated }, span });
        }
        if negated {
            return self.fail("`in`");
        }
        Ok(lhs)
    }

    fn add_expr(&mut self) -> PResult<RawExpr> {
        let mut lhs = self.postfix()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.postfix()?;
            lhs = self.binary(lhs, rhs, |a, b| RawExprKind::Arith(op, a, b))?;
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> PResult<RawExpr> {
        let mut e = self.primary()?;
        while self.eat(&Tok::Dot) {
            let field = self.field_name()?;
            let span = e.span.join(&field.span);
            e = RawExpr { kind: RawExprKind::Dotted(Box::new(e), field), span };
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<RawExpr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if n > i64::MAX as i128 {
                    self.diags.push(Diagnostic::error(codes::LEXICAL, start, "integer literal out of range"));
                    return Err(Bail);
                }
                Ok(RawExpr { kind: RawExprKind::Int(n as i64), span: start })
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(n) = self.bump().tok else { unreachable!() };
                let span = start.join(&self.prev_span());
                Ok(RawExpr { kind: RawExprKind::Int((-n) as i64), span })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(RawExpr { kind: inner.kind, span: start.join(&self.prev_span()) })
            }
            Tok::Dot => {
                self.bump();
                let field = self.field_name()?;
                let span = start.join(&field.span);
                Ok(RawExpr { kind: RawExprKind::ElemField(field), span })
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.at(&Tok::RBracket) {
                    items.push(self.expr()?);
                    while self.eat(&Tok::Comma) {
                        items.push(self.expr()?);
                    }
                }
                let end = self.expect(Tok::RBracket)?;
                Ok(RawExpr { kind: RawExprKind::List(items), span: start.join(&end) })
            }
            Tok::LBrace => {
                self.bump();
                let mut fields = Vec::new();
                loop {
                    let name = self.field_name()?;
                    self.expect(Tok::Colon)?;
                    fields.push((name, self.expr()?));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                let end = self.expect(Tok::RBrace)?;
                Ok(RawExpr { kind: RawExprKind::Record(fields), span: start.join(&end) })
            }
            Tok::Word(w) => match w.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(RawExpr { kind: RawExprKind::Bool(w == "true"), span: start })
                }
                "none" => {
                    self.bump();
                    Ok(RawExpr { kind: RawExprKind::None, span: start })
                }
                "it" => {
                    self.bump();
                    Ok(RawExpr { kind: RawExprKind::Elem, span: start })
                }
                _ if is_keyword(&w) => self.fail("an expression"),
                _ => {
                    self.bump();
                    if self.at(&Tok::LParen) {
                        return self.call(Ident { name: w, span: start });
                    }
                    Ok(RawExpr { kind: RawExprKind::Name(w), span: start })
                }
            },
            _ => self.fail("an expression"),
        }
    }

    fn call(&mut self, name: Ident) -> PResult<RawExpr> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        let mut filter = None;
        let mut set = None;
        if !self.at(&Tok::RParen) {
            args.push(self.expr()?);
            while self.eat(&Tok::Comma) {
                args.push(self.expr()?);
            }
            if self.eat_word("where") {
                filter = Some(Box::new(self.expr()?));
            }
            if self.eat_word("set") {
                let field = self.field_name()?;
                self.expect(Tok::Assign)?;
                set = Some((field, Box::new(self.expr()?)));
            }
        }
        let end = self.expect(Tok::RParen)?;
        let span = name.span.join(&end);
        Ok(RawExpr { kind: RawExprKind::Call { name, args, filter, set }, span })
    }
}

impl Parser {
    fn binary(
        &mut self,
        lhs: RawExpr,
        rhs: RawExpr,
        kind: impl FnOnce(Box<RawExpr>, Box<RawExpr>) -> RawExprKind,
    ) -> PResult<RawExpr> {
        self.operators += 1;
        let span = lhs.span.join(&rhs.span);
        if self.operators > MAX_OPERATORS {
            self.diags.push(Diagnostic::error(codes::SYNTAX, span, "expression has too many operators"));
            return Err(Bail);
        }
        Ok(RawExpr { kind: kind(Box::new(lhs), Box::new(rhs)), span })
    }
}
