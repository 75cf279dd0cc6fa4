use serde::Serialize;

use crate::model::{ActionSig, Model, Rule};

/// Old and new rendering of something that exists in both models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Retyped {
    pub name: String,
    pub old: String,
    pub new: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnumChange {
    pub name: String,
    pub added_members: Vec<String>,
    pub removed_members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordChange {
    pub name: String,
    pub added_fields: Vec<String>,
    pub removed_fields: Vec<String>,
    pub retyped_fields: Vec<Retyped>,
}

/// A rule present in both models under the same label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleChange {
    pub label: String,
    /// `actionChanged`, `guardChanged`, `updatesChanged`, `implChanged`.
    pub kinds: Vec<&'static str>,
    pub old: String,
    pub new: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Section<C> {
    pub added: Vec<String>,
    pub removed: Vec<String>,
    pub changed: Vec<C>,
}

impl<C> Default for Section<C> {
    fn default() -> Self {
        Section { added: Vec::new(), removed: Vec::new(), changed: Vec::new() }
    }
}

impl<C> Section<C> {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.changed.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelDiff {
    pub renamed: Option<Retyped>,
    pub enums: Section<EnumChange>,
    pub records: Section<RecordChange>,
    pub state_vars: Section<Retyped>,
    pub init: Section<Retyped>,
    pub actions: Section<Retyped>,
    pub rules: Section<RuleChange>,
    /// Rules common to both models fire in a different priority order.
    pub rule_order: Option<Retyped>,
    pub observe: Section<Retyped>,
    pub invariants: Section<Retyped>,
    pub meta: Section<Retyped>,
}

impl ModelDiff {
    pub fn is_empty(&self) -> bool {
        self.renamed.is_none()
            && self.enums.is_empty()
            && self.records.is_empty()
            && self.state_vars.is_empty()
            && self.init.is_empty()
            && self.actions.is_empty()
            && self.rules.is_empty()
            && self.rule_order.is_none()
            && self.observe.is_empty()
            && self.invariants.is_empty()
            && self.meta.is_empty()
    }
}

/// Names in `new` but not `old`, names in `old` but not `new`, and a change
/// record for every name in both for which `compare` reports one.
fn section<T, C>(old: &[T], new: &[T], key: impl Fn(&T) -> &str, compare: impl Fn(&T, &T) -> Option<C>) -> Section<C> {
    let find = |items: &'_ [T], name: &str| items.iter().position(|t| key(t) == name);
    let mut s = Section::default();
    for n in new {
        if find(old, key(n)).is_none() {
            s.added.push(key(n).to_string());
        }
    }
    for o in old {
        match find(new, key(o)) {
            None => s.removed.push(key(o).to_string()),
            Some(i) => s.changed.extend(compare(o, &new[i])),
        }
    }
    s
}

fn text_section<T>(old: &[T], new: &[T], key: impl Fn(&T) -> &str, render: impl Fn(&T) -> String) -> Section<Retyped> {
    section(old, new, &key, |o, n| {
        let (a, b) = (render(o), render(n));
        (a != b).then(|| Retyped { name: key(o).to_string(), old: a, new: b })
    })
}

fn missing_from(a: &[String], b: &[String]) -> Vec<String> {
    a.iter().filter(|x| !b.contains(x)).cloned().collect()
}

fn signature(a: &ActionSig) -> String {
    let params: Vec<String> = a.params.iter().map(|(p, t)| format!("{p}: {t}")).collect();
    format!("({})", params.join(", "))
}

fn updates_text(r: &Rule) -> String {
    let parts: Vec<String> = r.updates.iter().map(|(v, e)| format!("{v} := {e}")).collect();
    parts.join(", ")
}

fn rule_change(o: &Rule, n: &Rule) -> Option<RuleChange> {
    let mut kinds = Vec::new();
    if o.action != n.action {
        kinds.push("actionChanged");
    }
    if o.guard.to_string() != n.guard.to_string() {
        kinds.push("guardChanged");
    }
    if updates_text(o) != updates_text(n) {
        kinds.push("updatesChanged");
    }
    if o.impl_link != n.impl_link {
        kinds.push("implChanged");
    }
    (!kinds.is_empty()).then(|| RuleChange {
        label: o.label.clone(),
        kinds,
        old: crate::dsl::format_rule(o),
        new: crate::dsl::format_rule(n),
    })
}

fn rule_order(old: &Model, new: &Model) -> Option<Retyped> {
    let common = |a: &Model, b: &Model| -> Vec<String> {
        a.rules.iter().filter(|r| b.rule(&r.label).is_some()).map(|r| r.label.clone()).collect()
    };
    let (a, b) = (common(old, new), common(new, old));
    (a != b).then(|| Retyped { name: "rules".into(), old: a.join(", "), new: b.join(", ") })
}

/// Per-category structural difference from `old` to `new`. Rules are matched
/// by label; expressions are compared by their canonical text.
pub fn diff_models(old: &Model, new: &Model) -> ModelDiff {
    ModelDiff {
        renamed: (old.name != new.name).then(|| Retyped {
            name: "model".into(),
            old: old.name.clone(),
            new: new.name.clone(),
        }),
        enums: section(&old.types.enums, &new.types.enums, |e| &e.name, |o, n| {
            let change = EnumChange {
                name: o.name.clone(),
                added_members: missing_from(&n.members, &o.members),
                removed_members: missing_from(&o.members, &n.members),
            };
            (!change.added_members.is_empty() || !change.removed_members.is_empty() || o.members != n.members)
                .then_some(change)
        }),
        records: section(&old.types.records, &new.types.records, |r| &r.name, |o, n| {
            let fields = text_section(&o.fields, &n.fields, |f| &f.0, |f| f.1.to_string());
            let reordered = fields.is_empty() && o.fields != n.fields;
            (!fields.is_empty() || reordered).then(|| RecordChange {
                name: o.name.clone(),
                added_fields: fields.added,
                removed_fields: fields.removed,
                retyped_fields: fields.changed,
            })
        }),
        state_vars: text_section(&old.state_vars, &new.state_vars, |v| &v.0, |v| v.1.to_string()),
        init: text_section(&old.init, &new.init, |v| &v.0, |v| v.1.to_string()),
        actions: text_section(&old.actions, &new.actions, |a| &a.name, signature),
        rules: section(&old.rules, &new.rules, |r| &r.label, rule_change),
        rule_order: rule_order(old, new),
        observe: text_section(&old.observe, &new.observe, |o| &o.0, |o| o.1.to_string()),
        invariants: text_section(&old.invariants, &new.invariants, |i| &i.0, |i| i.1.to_string()),
        meta: text_section(&old.meta, &new.meta, |m| &m.0, |m| m.1.clone()),
    }
}
