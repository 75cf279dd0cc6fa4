//! Unresolved syntax tree produced by the parser.

use crate::diag::Span;

#[derive(Debug, Clone)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum RawTypeKind {
    Bool,
    Int,
    Id,
    Named(String),
    List(Box<RawType>),
}

#[derive(Debug, Clone)]
pub struct RawType {
    pub kind: RawTypeKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum RawExprKind {
    Int(i64),
    Bool(bool),
    None,
    /// A bare identifier: variable, enum member or id token, decided later.
    Name(String),
    /// `it`
    Elem,
    /// `A.b`: enum symbol or field access, decided later.
    Dotted(Box<RawExpr>, Ident),
    /// `.field` inside a where clause.
    ElemField(Ident),
    Compare(crate::expr::CmpOp, Box<RawExpr>, Box<RawExpr>),
    Logic(crate::expr::LogicOp, Box<RawExpr>, Box<RawExpr>),
    Not(Box<RawExpr>),
    In { subject: Box<RawExpr>, members: Vec<RawExpr>, negated: bool },
    Arith(crate::expr::ArithOp, Box<RawExpr>, Box<RawExpr>),
    Record(Vec<(Ident, RawExpr)>),
    List(Vec<RawExpr>),
    Call { name: Ident, args: Vec<RawExpr>, filter: Option<Box<RawExpr>>, set: Option<(Ident, Box<RawExpr>)> },
}

#[derive(Debug, Clone)]
pub struct RawExpr {
    pub kind: RawExprKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum RawDecl {
    Meta { key: Ident, value: String },
    Enum { name: Ident, members: Vec<Ident> },
    Record { name: Ident, fields: Vec<(Ident, RawType)> },
    Var { name: Ident, ty: RawType },
    Init { var: Ident, value: RawExpr },
    Action { name: Ident, params: Vec<(Ident, RawType)> },
    Rule { label: Ident, action: Ident, guard: Option<RawExpr>, updates: Vec<(Ident, RawExpr)>, impls: Vec<(String, Span)> },
    Observe { outputs: Vec<(Ident, RawExpr)> },
    Invariant { name: Ident, expr: RawExpr },
}

#[derive(Debug, Clone)]
pub struct RawModel {
    pub name: Ident,
    pub decls: Vec<(RawDecl, Span)>,
}
