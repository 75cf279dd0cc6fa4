//! Reasoning aids over a model: bounded exploration, questions for the
//! learner, conformance against observed traces, model diffs and graph export.

mod conformance;
mod diff;
mod explore;
mod graph;
mod questions;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::format_model;
use crate::model::Model;
use crate::value::{Decls, TypeExpr, Value};

pub use conformance::{check_conformance, observables_match, DivergenceReport, DivergenceStatus, ListOrder};
pub use diff::{diff_models, EnumChange, ModelDiff, RecordChange, RuleChange, Section, Retyped};
pub use explore::{
    explore, EvalFailure, ExplorationResult, ExploredState, InvariantViolation, Overlap, Transition, UndefinedPair,
};
pub use graph::{export_graph, GraphFormat};
pub use questions::{questions_report, undefined_prompt, QuestionItem, QuestionKind, UnderspecReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),
    #[error("exploration was produced from a different model (fingerprint {found}, expected {expected})")]
    StaleExploration { expected: String, found: String },
    #[error("trace step {0} has no expected observable")]
    MissingExpectation(usize),
    #[error(transparent)]
    Session(#[from] crate::session::SessionError),
}

/// Finite value pools that bound exploration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Universe {
    pub id_pool: Vec<String>,
    pub max_list_len: usize,
    pub int_range: (i64, i64),
}

impl Default for Universe {
    fn default() -> Self {
        Universe { id_pool: vec!["t1".into(), "t2".into()], max_list_len: 3, int_range: (0, 3) }
    }
}

impl Universe {
    pub fn with_ids(ids: &[&str]) -> Self {
        Universe { id_pool: ids.iter().map(|s| s.to_string()).collect(), ..Universe::default() }
    }

    pub fn max_list_len(mut self, n: usize) -> Self {
        self.max_list_len = n;
        self
    }

    /// Candidate values for an action parameter of type `ty`.
    pub fn candidates(&self, ty: &TypeExpr, decls: &Decls) -> Vec<Value> {
        match ty {
            TypeExpr::Bool => vec![Value::Bool(false), Value::Bool(true)],
            TypeExpr::Int => (self.int_range.0..=self.int_range.1).map(Value::Int).collect(),
            TypeExpr::Id => self.id_pool.iter().map(|t| Value::id(t)).collect(),
            TypeExpr::Enum(e) => decls
                .enum_decl(e)
                .map(|d| d.members.iter().map(|m| Value::sym(e, m)).collect())
                .unwrap_or_default(),
            TypeExpr::Record(_) | TypeExpr::List(_) => Vec::new(),
        }
    }

    /// Checks the pools against the parameter types the model uses.
    pub fn check(&self, model: &Model) -> Result<(), AnalysisError> {
        if self.max_list_len == 0 {
            return Err(AnalysisError::UniverseMismatch("max list length must be at least 1".into()));
        }
        for sig in &model.actions {
            for (pname, pty) in &sig.params {
                match pty {
                    TypeExpr::Id if self.id_pool.is_empty() => {
                        return Err(AnalysisError::UniverseMismatch(format!(
                            "parameter {pname} of {} is an id but the id pool is empty",
                            sig.name
                        )))
                    }
                    TypeExpr::Int if self.int_range.0 > self.int_range.1 => {
                        return Err(AnalysisError::UniverseMismatch(format!(
                            "parameter {pname} of {} is an int but the int range is empty",
                            sig.name
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Stable identity of a model's content, independent of layout and comments.
pub fn fingerprint(model: &Model) -> String {
    let digest = Sha256::digest(format_model(model).as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
