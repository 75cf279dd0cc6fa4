//! Lightweight transition-system models for understanding software systems.
//!
//! A model names its state variables, initial state, actions, guarded rules
//! and observe clause. This crate parses `.tsm` model files, runs models step
//! by step or over whole traces, and analyses them: bounded exploration,
//! questions about gaps in the model, conformance against observed traces,
//! diffs between model versions and graph export.

pub mod analysis;
pub mod diag;
pub mod dsl;
pub mod expr;
pub mod fixtures;
pub mod model;
pub mod session;
pub mod trace;
pub mod value;

pub use analysis::Universe;
pub use diag::{Diagnostic, Severity, Span};
pub use dsl::{format_model, parse, parse_source};
pub use expr::{EvalError, EvalErrorKind, Expr};
pub use model::{ActionInstance, Env, Model, ObsEnv, StateEnv, StepOutcome};
pub use session::{replay, Session, Trace, TraceStep};
pub use value::{TypeExpr, Value};
