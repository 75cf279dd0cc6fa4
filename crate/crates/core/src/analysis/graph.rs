use std::fmt::Write;

use serde_json::{json, Map, Value as Json};

use super::ExplorationResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Json,
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the explored state graph. States are numbered in canonical-form
/// order, so the output depends only on the sets of states and transitions.
pub fn export_graph(exploration: &ExplorationResult, format: GraphFormat) -> String {
    let mut order: Vec<usize> = (0..exploration.states.len()).collect();
    order.sort_by(|&a, &b| exploration.states[a].key.cmp(&exploration.states[b].key));
    let mut id = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        id[old] = new;
    }

    let mut edges: Vec<(usize, String, String, usize, &str, Json)> = exploration
        .transitions
        .iter()
        .map(|t| {
            let params = exploration
                .action_params
                .iter()
                .find(|(a, _)| *a == t.action.name)
                .map(|(_, p)| p.as_slice())
                .unwrap_or(&[]);
            let args: Map<String, Json> =
                params.iter().zip(&t.action.args).map(|(p, v)| (p.clone(), Json::String(v.to_string()))).collect();
            (id[t.from], t.action.to_string(), t.rule.clone(), id[t.to], t.action.name.as_str(), Json::Object(args))
        })
        .collect();
    edges.sort_by(|a, b| (a.0, &a.1, &a.2, a.3).cmp(&(b.0, &b.1, &b.2, b.3)));

    let mut undefined: Vec<(usize, &str)> =
        exploration.undefined.iter().map(|u| (id[u.state], u.action.as_str())).collect();
    undefined.sort();

    match format {
        GraphFormat::Dot => {
            let mut out = String::new();
            let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(&exploration.model_name));
            out.push_str("  node [shape=circle];\n");
            for (new, &old) in order.iter().enumerate() {
                let shape = if old == 0 { ", shape=doublecircle" } else { "" };
                let _ = writeln!(out, "  s{new} [label=\"{}\"{shape}];", dot_escape(&exploration.states[old].key));
            }
            for (from, action, rule, to, _, _) in &edges {
                let _ = writeln!(out, "  s{from} -> s{to} [label=\"{} / {}\"];", dot_escape(action), dot_escape(rule));
            }
            out.push_str("}\n");
            out
        }
        GraphFormat::Json => {
            let states: Vec<Json> = order
                .iter()
                .enumerate()
                .map(|(new, &old)| json!({"id": new, "canonical": exploration.states[old].key, "initial": old == 0}))
                .collect();
            let transitions: Vec<Json> = edges
                .into_iter()
                .map(|(from, _, rule, to, name, args)| {
                    json!({"from": from, "action": name, "args": args, "rule": rule, "to": to})
                })
                .collect();
            let undefined: Vec<Json> = undefined.iter().map(|(s, a)| json!({"state": s, "action": a})).collect();
            let doc = json!({
                "states": states,
                "transitions": transitions,
                "undefined": undefined,
                "truncated": exploration.frontier_truncated,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("graph serializes");
            text.push('\n');
            text
        }
    }
}
