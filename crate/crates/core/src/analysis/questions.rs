use std::collections::BTreeSet;

use serde::Serialize;

use super::{fingerprint, AnalysisError, ExplorationResult};
use crate::diag::Span;
use crate::model::Model;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum QuestionKind {
    UndefinedTransition,
    OverlappingRules,
    UnreachableEnumMember,
    UnusedAction,
    RuleWithoutImplLink,
}

impl QuestionKind {
    pub fn name(self) -> &'static str {
        match self {
            QuestionKind::UndefinedTransition => "undefinedTransition",
            QuestionKind::OverlappingRules => "overlappingRules",
            QuestionKind::UnreachableEnumMember => "unreachableEnumMember",
            QuestionKind::UnusedAction => "unusedAction",
            QuestionKind::RuleWithoutImplLink => "ruleWithoutImplLink",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuestionItem {
    pub kind: QuestionKind,
    /// Names the question is about: actions, rule labels or `Enum.member`.
    pub subject: Vec<String>,
    /// Canonical rendering of a concrete state exhibiting the issue.
    pub witness: Option<String>,
    /// Source locations of the declarations involved, where known.
    pub spans: Vec<Span>,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnderspecReport {
    pub model: String,
    pub truncated: bool,
    pub questions: Vec<QuestionItem>,
}

impl UnderspecReport {
    pub fn count(&self, kind: QuestionKind) -> usize {
        self.questions.iter().filter(|q| q.kind == kind).count()
    }
}

/// Prompt for an action that no rule handles in `state`.
pub fn undefined_prompt(action: &str, state: &str) -> String {
    format!("What does the system do when {action} occurs in state {state}?")
}

fn known(spans: impl IntoIterator<Item = Option<Span>>) -> Vec<Span> {
    spans.into_iter().flatten().filter(Span::is_known).collect()
}

/// Turns the gaps an exploration found into questions for the learner, in
/// the order: undefined transitions, overlapping rules, unreachable enum
/// members, unused actions, rules without implementation links.
pub fn questions_report(model: &Model, exploration: &ExplorationResult) -> Result<UnderspecReport, AnalysisError> {
    let expected = fingerprint(model);
    if exploration.fingerprint != expected {
        return Err(AnalysisError::StaleExploration { expected, found: exploration.fingerprint.clone() });
    }
    let rule_span = |label: &str| {
        let i = model.rules.iter().position(|r| r.label == label)?;
        model.source.rules.get(i).cloned()
    };
    let action_span = |name: &str| {
        let i = model.actions.iter().position(|a| a.name == name)?;
        model.source.actions.get(i).cloned()
    };
    let mut questions = Vec::new();

    for u in &exploration.undefined {
        let state = &exploration.states[u.state].key;
        questions.push(QuestionItem {
            kind: QuestionKind::UndefinedTransition,
            subject: vec![u.action.clone()],
            witness: Some(state.clone()),
            spans: known([action_span(&u.action)]),
            prompt: undefined_prompt(&u.action, state),
        });
    }

    for o in &exploration.overlaps {
        let state = &exploration.states[o.state].key;
        questions.push(QuestionItem {
            kind: QuestionKind::OverlappingRules,
            subject: vec![o.first.clone(), o.second.clone()],
            witness: Some(state.clone()),
            spans: known([rule_span(&o.first), rule_span(&o.second)]),
            prompt: format!(
                "Rules {} and {} both apply when {} occurs in state {state}; only {} fires. Is that what the system does?",
                o.first, o.second, o.action, o.first
            ),
        });
    }

    if !exploration.frontier_truncated {
        let mut seen: BTreeSet<(&str, &str)> = BTreeSet::new();
        for s in &exploration.states {
            for v in s.env.values() {
                v.walk(&mut |x| {
                    if let Value::Sym { enum_name, member } = x {
                        seen.insert((enum_name.as_str(), member.as_str()));
                    }
                });
            }
        }
        for (i, e) in model.types.enums.iter().enumerate() {
            for m in &e.members {
                if !seen.contains(&(e.name.as_str(), m.as_str())) {
                    questions.push(QuestionItem {
                        kind: QuestionKind::UnreachableEnumMember,
                        subject: vec![format!("{}.{m}", e.name)],
                        witness: None,
                        spans: known([model.source.enums.get(i).cloned()]),
                        prompt: format!(
                            "No reachable state contains {}.{m}. Which event makes the system reach it?",
                            e.name
                        ),
                    });
                }
            }
        }
    }

    for a in &model.actions {
        if !model.rules.iter().any(|r| r.action == a.name) {
            questions.push(QuestionItem {
                kind: QuestionKind::UnusedAction,
                subject: vec![a.name.clone()],
                witness: None,
                spans: known([action_span(&a.name)]),
                prompt: format!("What does the system do when {} occurs? No rule handles it.", a.name),
            });
        }
    }

    if model.expects_impl_links() {
        for r in model.rules.iter().filter(|r| r.impl_link.is_none()) {
            questions.push(QuestionItem {
                kind: QuestionKind::RuleWithoutImplLink,
                subject: vec![r.label.clone()],
                witness: None,
                spans: known([rule_span(&r.label)]),
                prompt: format!("Where in the codebase is rule {} (on {}) implemented?", r.label, r.action),
            });
        }
    }

    Ok(UnderspecReport {
        model: model.name.clone(),
        truncated: exploration.frontier_truncated,
        questions,
    })
}
