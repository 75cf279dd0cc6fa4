//! Runtime values, their types, and the enum/record declarations they refer to.

use std::fmt;

/// Static type of a state variable, parameter, record field or expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Bool,
    Int,
    Enum(String),
    Id,
    Record(String),
    List(Box<TypeExpr>),
}

impl TypeExpr {
    pub fn list_of(elem: TypeExpr) -> TypeExpr {
        TypeExpr::List(Box::new(elem))
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, TypeExpr::Bool | TypeExpr::Int | TypeExpr::Enum(_) | TypeExpr::Id)
    }

    pub fn list_elem(&self) -> Option<&TypeExpr> {
        match self {
            TypeExpr::List(elem) => Some(elem),
            _ => None,
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Bool => f.write_str("bool"),
            TypeExpr::Int => f.write_str("int"),
            TypeExpr::Id => f.write_str("id"),
            TypeExpr::Enum(name) | TypeExpr::Record(name) => f.write_str(name),
            TypeExpr::List(elem) => write!(f, "list<{elem}>"),
        }
    }
}

/// A runtime datum. States and observables are environments of these.
///
/// `Id(None)` is the distinguished `none` identifier: a reference to nothing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Sym { enum_name: String, member: String },
    Id(Option<String>),
    Record { name: String, fields: Vec<(String, Value)> },
    List { elem: TypeExpr, items: Vec<Value> },
}

impl Value {
    pub fn sym(enum_name: &str, member: &str) -> Value {
        Value::Sym { enum_name: enum_name.to_string(), member: member.to_string() }
    }

    pub fn id(token: &str) -> Value {
        Value::Id(Some(token.to_string()))
    }

    pub fn none() -> Value {
        Value::Id(None)
    }

    pub fn empty_list(elem: TypeExpr) -> Value {
        Value::List { elem, items: Vec::new() }
    }

    pub fn type_expr(&self) -> TypeExpr {
        match self {
            Value::Bool(_) => TypeExpr::Bool,
            Value::Int(_) => TypeExpr::Int,
            Value::Sym { enum_name, .. } => TypeExpr::Enum(enum_name.clone()),
            Value::Id(_) => TypeExpr::Id,
            Value::Record { name, .. } => TypeExpr::Record(name.clone()),
            Value::List { elem, .. } => TypeExpr::list_of(elem.clone()),
        }
    }

    pub fn field(&self, name: &str) -> Option<&Value> {
        match self {
            Value::Record { fields, .. } => fields.iter().find(|(f, _)| f == name).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List { items, .. } => Some(items),
            _ => None,
        }
    }

    /// Calls `visit` on this value and every value nested inside it.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Value)) {
        visit(self);
        match self {
            Value::Record { fields, .. } => fields.iter().for_each(|(_, v)| v.walk(visit)),
            Value::List { items, .. } => items.iter().for_each(|v| v.walk(visit)),
            _ => {}
        }
    }
}

/// Canonical rendering: `Enum.Member`, bare id tokens or `none`, records in
/// declaration order, lists in item order.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym { enum_name, member } => write!(f, "{enum_name}.{member}"),
            Value::Id(Some(token)) => f.write_str(token),
            Value::Id(None) => f.write_str("none"),
            Value::Record { fields, .. } => {
                f.write_str("{")?;
                for (i, (name, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {value}")?;
                }
                f.write_str("}")
            }
            Value::List { items, .. } => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumDecl {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordDecl {
    pub name: String,
    pub fields: Vec<(String, TypeExpr)>,
}

impl RecordDecl {
    pub fn field_type(&self, field: &str) -> Option<&TypeExpr> {
        self.fields.iter().find(|(f, _)| f == field).map(|(_, t)| t)
    }
}

/// The enum and record declarations of a model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decls {
    pub enums: Vec<EnumDecl>,
    pub records: Vec<RecordDecl>,
}

impl Decls {
    pub fn enum_decl(&self, name: &str) -> Option<&EnumDecl> {
        self.enums.iter().find(|e| e.name == name)
    }

    pub fn record_decl(&self, name: &str) -> Option<&RecordDecl> {
        self.records.iter().find(|r| r.name == name)
    }

    /// Enums declaring a member called `member`.
    pub fn enums_with_member<'a>(&'a self, member: &'a str) -> impl Iterator<Item = &'a EnumDecl> + 'a {
        self.enums.iter().filter(move |e| e.members.iter().any(|m| m == member))
    }

    /// Checks that every name in `ty` is declared and the v1 nesting rules hold:
    /// no list inside a list, no list inside a record.
    pub fn check_type(&self, ty: &TypeExpr) -> Result<(), String> {
        match ty {
            TypeExpr::Bool | TypeExpr::Int | TypeExpr::Id => Ok(()),
            TypeExpr::Enum(name) => self
                .enum_decl(name)
                .map(|_| ())
                .ok_or_else(|| format!("unknown enum {name}")),
            TypeExpr::Record(name) => self
                .record_decl(name)
                .map(|_| ())
                .ok_or_else(|| format!("unknown record {name}")),
            TypeExpr::List(elem) => {
                if matches!(**elem, TypeExpr::List(_)) {
                    return Err("lists of lists are not supported".to_string());
                }
                self.check_type(elem)
            }
        }
    }

    /// Deep conformance of a value to a type.
    pub fn conforms(&self, value: &Value, ty: &TypeExpr) -> bool {
        match (value, ty) {
            (Value::Bool(_), TypeExpr::Bool) | (Value::Int(_), TypeExpr::Int) | (Value::Id(_), TypeExpr::Id) => true,
            (Value::Sym { enum_name, member }, TypeExpr::Enum(name)) => {
                enum_name == name
                    && self.enum_decl(name).is_some_and(|e| e.members.iter().any(|m| m == member))
            }
            (Value::Record { name: rname, fields }, TypeExpr::Record(name)) => {
                let Some(decl) = self.record_decl(name) else { return false };
                rname == name
                    && fields.len() == decl.fields.len()
                    && fields
                        .iter()
                        .zip(&decl.fields)
                        .all(|((fname, fval), (dname, dty))| fname == dname && self.conforms(fval, dty))
            }
            (Value::List { elem, items }, TypeExpr::List(want)) => {
                elem == &**want && items.iter().all(|item| self.conforms(item, want))
            }
            _ => false,
        }
    }
}
