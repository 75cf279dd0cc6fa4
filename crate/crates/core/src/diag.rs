//! Source locations and diagnostics shared by the front end and the validator.

use std::fmt;

use serde::Serialize;

/// A 1-based, inclusive-start region of a source file. Columns count code points.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Span {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(file: &str, start: (u32, u32), end: (u32, u32)) -> Self {
        Span {
            file: file.to_string(),
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(&self, other: &Span) -> Span {
        let start = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let end = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        Span::new(&self.file, start, end)
    }

    pub fn is_known(&self) -> bool {
        self.start_line > 0
    }

    /// True when `(line, col)` falls inside this span.
    pub fn contains(&self, line: u32, col: u32) -> bool {
        (self.start_line, self.start_col) <= (line, col) && (line, col) < (self.end_line, self.end_col)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.is_known() {
            return write!(f, "{}", if self.file.is_empty() { "<model>" } else { &self.file });
        }
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub span: Span,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, code, span, message: message.into(), hint: None }
    }

    pub fn warning(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, code, span, message: message.into(), hint: None }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {}[{}]: {}", self.span, sev, self.code, self.message)?;
        if let Some(hint) = &self.hint {
            write!(f, " (hint: {hint})")?;
        }
        Ok(())
    }
}

/// Stable diagnostic codes.
pub mod codes {
    pub const SYNTAX: &str = "E001";
    pub const LEXICAL: &str = "E002";
    pub const DUPLICATE: &str = "E003";
    pub const UNKNOWN_TYPE: &str = "E004";
    pub const INVALID_TYPE: &str = "E005";
    pub const INIT_MISSING: &str = "E006";
    pub const INIT_UNKNOWN: &str = "E007";
    pub const INIT_NOT_CONSTANT: &str = "E008";
    pub const TYPE_MISMATCH: &str = "E009";
    pub const UNKNOWN_ACTION: &str = "E010";
    pub const UNKNOWN_NAME: &str = "E011";
    pub const UNKNOWN_FIELD: &str = "E012";
    pub const BAD_UPDATE: &str = "E013";
    pub const MODEL_HEADER: &str = "E014";
    pub const UNKNOWN_MEMBER: &str = "E015";
    pub const BAD_WHERE: &str = "E016";
    pub const BAD_CALL: &str = "E017";
    pub const NO_OBSERVE: &str = "E018";
    pub const BAD_ANNOTATION: &str = "E019";
    pub const UNUSED_ACTION: &str = "W001";
    pub const MISSING_IMPL: &str = "W002";
}
