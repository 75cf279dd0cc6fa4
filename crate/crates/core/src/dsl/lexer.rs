use crate::diag::{codes, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    Int(i128),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Assign,
    Arrow,
    Comma,
    Colon,
    Dot,
    Plus,
    Minus,
    At,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Str(_) => "string".to_string(),
            Tok::Eof => "end of file".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Assign => ":=",
            Tok::Arrow => "=>",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::At => "@",
            _ => "?",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Splits source text into tokens. Lexical errors are reported and the
/// offending character skipped, so lexing always reaches the end.
pub fn lex(file: &str, source: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
            continue;
        }
        let start = (line, col);
        let tok = if c.is_ascii_alphabetic() {
            let mut word = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                word.push(chars[i]);
                advance!();
            }
            Tok::Word(word)
        } else if c.is_ascii_digit() {
            let mut n: i128 = 0;
            let mut overflow = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                let digit = chars[i].to_digit(10).unwrap_or(0) as i128;
                match n.checked_mul(10).and_then(|m| m.checked_add(digit)) {
                    Some(m) if m <= i64::MAX as i128 + 1 => n = m,
                    _ => overflow = true,
                }
                advance!();
            }
            if overflow {
                diags.push(Diagnostic::error(codes::LEXICAL, Span::new(file, start, (line, col)), "integer literal out of range"));
                continue;
            }
            Tok::Int(n)
        } else if c == '"' {
            advance!();
            let mut text = String::new();
            let mut closed = false;
            while i < chars.len() {
                match chars[i] {
                    '"' => {
                        advance!();
                        closed = true;
                        break;
                    }
                    '\n' => break,
                    '\\' if i + 1 < chars.len() => {
                        advance!();
                        text.push(match chars[i] {
                            'n' => '\n',
                            't' => '\t',
                            other => other,
                        });
                        advance!();
                    }
                    other => {
                        text.push(other);
                        advance!();
                    }
                }
            }
            if !closed {
                diags.push(Diagnostic::error(codes::LEXICAL, Span::new(file, start, (line, col)), "unterminated string literal"));
                continue;
            }
            Tok::Str(text)
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                (':', Some('=')) => (Tok::Assign, 2),
                ('=', Some('>')) => (Tok::Arrow, 2),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                (',', _) => (Tok::Comma, 1),
                (':', _) => (Tok::Colon, 1),
                ('.', _) => (Tok::Dot, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('@', _) => (Tok::At, 1),
                _ => {
                    advance!();
                    diags.push(Diagnostic::error(
                        codes::LEXICAL,
                        Span::new(file, start, (line, col)),
                        format!("unexpected character {c:?}"),
                    ));
                    continue;
                }
            };
            for _ in 0..width {
                advance!();
            }
            tok
        };
        tokens.push(Token { tok, span: Span::new(file, start, (line, col)) });
    }
    tokens.push(Token { tok: Tok::Eof, span: Span::new(file, (line, col), (line, col + 1)) });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_operators_and_comments() {
        let (toks, diags) = lex("t", "rule r1: on a # comment\n when x <= 3 => y := z");
        assert!(diags.is_empty());
        let kinds: Vec<Tok> = toks.into_iter().map(|t| t.tok).collect();
        assert_eq!(kinds[2], Tok::Colon);
        assert!(kinds.contains(&Tok::Le));
        assert!(kinds.contains(&Tok::Arrow));
        assert!(kinds.contains(&Tok::Assign));
        assert_eq!(kinds.last(), Some(&Tok::Eof));
    }

    #[test]
    fn spans_are_one_based_code_points() {
        let (toks, _) = lex("t", "é x");
        assert_eq!(toks[0].span.start_col, 3);
        assert_eq!(toks[0].span.start_line, 1);
    }

    #[test]
    fn bad_characters_are_skipped_with_a_diagnostic() {
        let (toks, diags) = lex("t", "a $ b \"open");
        assert_eq!(diags.len(), 2);
        assert_eq!(toks.len(), 3);
    }
}
