//! Type-directed reader for canonical value text (`Color.Red`, `t1`, `none`,
//! `{id: t1, status: Status.done}`, `[...]`), as used in trace files, the
//! CLI and the HTTP API.

use super::lexer::{lex, Tok, Token};
use super::parser::is_keyword;
use crate::value::{Decls, TypeExpr, Value};

/// Reads one value of type `ty`. Enum members may be written bare.
pub fn parse_value(text: &str, ty: &TypeExpr, decls: &Decls) -> Result<Value, String> {
    let (tokens, diags) = lex("<value>", text);
    if let Some(d) = diags.first() {
        return Err(d.message.clone());
    }
    let mut reader = Reader { tokens, pos: 0, decls };
    let value = reader.value(ty)?;
    match reader.peek() {
        Tok::Eof => Ok(value),
        other => Err(format!("unexpected {} after value", other.describe())),
    }
}

struct Reader<'a> {
    tokens: Vec<Token>,
    pos: usize,
    decls: &'a Decls,
}

impl Reader<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), String> {
        let got = self.bump();
        if got == tok {
            Ok(())
        } else {
            Err(format!("expected {}, found {}", tok.describe(), got.describe()))
        }
    }

    fn word(&mut self) -> Result<String, String> {
        match self.bump() {
            Tok::Word(w) => Ok(w),
            other => Err(format!("expected a name, found {}", other.describe())),
        }
    }

    fn value(&mut self, ty: &TypeExpr) -> Result<Value, String> {
        match ty {
            TypeExpr::Bool => match self.word()?.as_str() {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                other => Err(format!("expected true or false, found {other}")),
            },
            TypeExpr::Int => {
                let negative = matches!(self.peek(), Tok::Minus);
                if negative {
                    self.bump();
                }
                match self.bump() {
                    Tok::Int(n) => {
                        let n = if negative { -n } else { n };
                        i64::try_from(n).map(Value::Int).map_err(|_| "integer out of range".to_string())
                    }
                    other => Err(format!("expected an integer, found {}", other.describe())),
                }
            }
            TypeExpr::Id => {
                let w = self.word()?;
                if w == "none" {
                    Ok(Value::none())
                } else if is_keyword(&w) {
                    Err(format!("`{w}` is not a valid id"))
                } else {
                    Ok(Value::id(&w))
                }
            }
            TypeExpr::Enum(e) => {
                let decl = self.decls.enum_decl(e).ok_or_else(|| format!("unknown enum {e}"))?;
                let mut member = self.word()?;
                if matches!(self.peek(), Tok::Dot) {
                    if member != *e {
                        return Err(format!("expected a member of {e}, found {member}"));
                    }
                    self.bump();
                    member = self.word()?;
                }
                if decl.members.contains(&member) {
                    Ok(Value::sym(e, &member))
                } else {
                    Err(format!("{member} is not a member of {e}"))
                }
            }
            TypeExpr::Record(r) => {
                let decl = self.decls.record_decl(r).ok_or_else(|| format!("unknown record {r}"))?.clone();
                self.expect(Tok::LBrace)?;
                let mut given: Vec<(String, Value)> = Vec::new();
                loop {
                    let name = self.word()?;
                    let fty = decl.field_type(&name).ok_or_else(|| format!("record {r} has no field {name}"))?;
                    self.expect(Tok::Colon)?;
                    let v = self.value(fty)?;
                    if given.iter().any(|(n, _)| *n == name) {
                        return Err(format!("field {name} given twice"));
                    }
                    given.push((name, v));
                    if !matches!(self.peek(), Tok::Comma) {
                        break;
                    }
                    self.bump();
                }
                self.expect(Tok::RBrace)?;
                let mut fields = Vec::with_capacity(decl.fields.len());
                for (fname, _) in &decl.fields {
                    let pos = given
                        .iter()
                        .position(|(n, _)| n == fname)
                        .ok_or_else(|| format!("record {r} is missing field {fname}"))?;
                    fields.push(given.swap_remove(pos));
                }
                Ok(Value::Record { name: r.clone(), fields })
            }
            TypeExpr::List(elem) => {
                self.expect(Tok::LBracket)?;
                let mut items = Vec::new();
                if !matches!(self.peek(), Tok::RBracket) {
                    loop {
                        items.push(self.value(elem)?);
                        if !matches!(self.peek(), Tok::Comma) {
                            break;
                        }
                        self.bump();
                    }
                }
                self.expect(Tok::RBracket)?;
                Ok(Value::List { elem: (**elem).clone(), items })
            }
        }
    }
}
