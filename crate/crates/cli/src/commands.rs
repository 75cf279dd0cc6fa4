//! Command-line definitions and the batch commands.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};
use tsm_core::analysis::{
    check_conformance, diff_models, explore, export_graph, questions_report, undefined_prompt, DivergenceStatus,
    GraphFormat, ListOrder, ModelDiff, Section,
};
use tsm_core::model::validate_model;
use tsm_core::trace::read_trace;
use tsm_core::{parse_source, replay, Diagnostic, Model, Trace, Universe};

use crate::render::{action_json, diagnostics_json, divergence_json, env_json, exploration_json, plural};

/// Exit status: success, conformant or nothing found.
pub const EXIT_OK: u8 = 0;
/// Exit status: findings such as a divergence or open questions.
pub const EXIT_FINDINGS: u8 = 1;
/// Exit status: bad usage, unreadable input or an invalid model.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "tsm", version, about = "Write, simulate and analyse transition-system models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model.
    Check {
        /// Model file.
        model: PathBuf,
        /// Treat warnings as findings.
        #[arg(long)]
        strict: bool,
        /// Print machine-readable JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Replay a trace file and print each step's observable.
    Sim {
        /// Model file.
        model: PathBuf,
        /// Trace file (JSON).
        trace: PathBuf,
        /// Print machine-readable JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Step through a model interactively.
    Step {
        /// Model file.
        model: PathBuf,
        #[command(flatten)]
        universe: UniverseArgs,
    },
    /// Enumerate the reachable states.
    Explore {
        /// Model file.
        model: PathBuf,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Write the state graph as Graphviz DOT.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
        /// Write the state graph as JSON.
        #[arg(long, value_name = "FILE")]
        graph_json: Option<PathBuf>,
        /// Print machine-readable JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Compare a model against an observed trace.
    Conform {
        /// Model file.
        model: PathBuf,
        /// Trace file (JSON).
        trace: PathBuf,
        /// Compare id-keyed lists element by element instead of as sets.
        #[arg(long)]
        strict_order: bool,
        /// Print machine-readable JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Show what changed between two versions of a model.
    Diff {
        /// Earlier version of the model.
        old: PathBuf,
        /// Later version of the model.
        new: PathBuf,
        /// Print machine-readable JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// List the questions the model leaves open.
    Questions {
        /// Model file.
        model: PathBuf,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Print machine-readable JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP API and, optionally, the explorer UI.
    Serve {
        /// Model file.
        model: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of static UI assets.
        #[arg(long, value_name = "DIR")]
        ui_dir: Option<PathBuf>,
        #[command(flatten)]
        universe: UniverseArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct UniverseArgs {
    /// Id values for id-typed action parameters.
    #[arg(long, value_delimiter = ',', value_name = "IDS")]
    pub ids: Option<Vec<String>>,
    /// Longest list a reachable state may hold.
    #[arg(long, value_name = "N")]
    pub max_list: Option<usize>,
    /// Most states to admit during exploration.
    #[arg(long, value_name = "N", default_value_t = 10_000)]
    pub max_states: usize,
}

impl UniverseArgs {
    pub fn universe(&self) -> Universe {
        let mut u = Universe::default();
        if let Some(ids) = &self.ids {
            u.id_pool = ids.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }
        if let Some(n) = self.max_list {
            u.max_list_len = n;
        }
        u
    }
}

/// Runs one command, writing its report to `out`. Returns the exit status.
/// `prompt` asks the interactive stepper to print prompts.
pub fn run(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write, prompt: bool) -> u8 {
    let json = matches!(
        cli.command,
        Command::Check { json: true, .. }
            | Command::Sim { json: true, .. }
            | Command::Explore { json: true, .. }
            | Command::Conform { json: true, .. }
            | Command::Diff { json: true, .. }
            | Command::Questions { json: true, .. }
    );
    let result = match cli.command {
        Command::Check { model, strict, json } => check(&model, strict, json, out),
        Command::Sim { model, trace, json } => sim(&model, &trace, json, out),
        Command::Step { model, universe } => {
            load(&model).and_then(|m| crate::repl::run(m, universe.universe(), input, out, prompt))
        }
        Command::Explore { model, universe, dot, graph_json, json } => {
            explore_cmd(&model, &universe, dot.as_deref(), graph_json.as_deref(), json, out)
        }
        Command::Conform { model, trace, strict_order, json } => conform(&model, &trace, strict_order, json, out),
        Command::Diff { old, new, json } => diff(&old, &new, json, out),
        Command::Questions { model, universe, json } => questions(&model, &universe, json, out),
        Command::Serve { model, port, host, ui_dir, universe } => load(&model)
            .and_then(|m| crate::serve::serve(m, universe.universe(), &host, port, ui_dir, out)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if json {
                let _ = writeln!(out, "{}", json!({"error": format!("{e:#}")}));
            }
            EXIT_ERROR
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn render_diags(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

/// Reads and parses a model, failing with its diagnostics.
pub fn load(path: &Path) -> Result<Model> {
    let text = read(path)?;
    parse_source(&path.display().to_string(), &text)
        .map_err(|diags| anyhow!("{} is not a valid model\n{}", path.display(), render_diags(&diags).trim_end()))
}

fn load_trace(model: &Model, path: &Path) -> Result<Trace> {
    read_trace(model, &read(path)?).with_context(|| format!("invalid trace {}", path.display()))
}

fn emit(out: &mut dyn Write, value: &Json) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn check(path: &Path, strict: bool, json: bool, out: &mut dyn Write) -> Result<u8> {
    let text = read(path)?;
    let (model, diags) = match parse_source(&path.display().to_string(), &text) {
        Ok(m) => {
            let warnings = validate_model(&m);
            (Some(m), warnings)
        }
        Err(diags) => (None, diags),
    };
    let errors = diags.iter().filter(|d| d.is_error()).count();
    let warnings = diags.len() - errors;
    let code = if errors > 0 {
        EXIT_ERROR
    } else if strict && warnings > 0 {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    };
    if json {
        emit(
            out,
            &json!({
                "model": model.as_ref().map(|m| m.name.clone()),
                "errors": errors,
                "warnings": warnings,
                "diagnostics": diagnostics_json(&diags),
            }),
        )?;
        return Ok(code);
    }
    write!(out, "{}", render_diags(&diags))?;
    match &model {
        Some(m) => writeln!(
            out,
            "{}: ok ({}, {}, {}, {})",
            m.name,
            plural(m.state_vars.len(), "state variable"),
            plural(m.actions.len(), "action"),
            plural(m.rules.len(), "rule"),
            plural(warnings, "warning")
        )?,
        None => writeln!(out, "{}: {}", path.display(), plural(errors, "error"))?,
    }
    Ok(code)
}

fn sim(path: &Path, trace_path: &Path, json: bool, out: &mut dyn Write) -> Result<u8> {
    let model = load(path)?;
    let trace = load_trace(&model, trace_path)?;
    let run = replay(&model, &trace)?;
    let halt_prompt = |i: usize| {
        let state = if i == 0 { &run.initial } else { &run.steps[i - 1].state };
        undefined_prompt(&trace.steps[i].action.name, &state.canonical())
    };
    let code = if run.halt.is_some() { EXIT_FINDINGS } else { EXIT_OK };
    if json {
        let steps: Vec<Json> = run
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                json!({
                    "index": i,
                    "action": action_json(&model, &s.action),
                    "rule": s.rule,
                    "state": env_json(&s.state),
                    "observable": env_json(&s.observable),
                })
            })
            .collect();
        let halt = run.halt.as_ref().map(|h| match &h.reason {
            tsm_core::session::HaltReason::Undefined => {
                json!({"index": h.index, "reason": "undefined", "question": halt_prompt(h.index)})
            }
            tsm_core::session::HaltReason::Error(e) => {
                json!({"index": h.index, "reason": "error", "error": e.to_string()})
            }
        });
        emit(
            out,
            &json!({
                "model": model.name,
                "initial": env_json(&run.initial),
                "steps": steps,
                "halt": halt,
                "finalState": env_json(&run.final_state),
            }),
        )?;
        return Ok(code);
    }
    writeln!(out, "init {}", run.initial.canonical())?;
    for (i, s) in run.steps.iter().enumerate() {
        let observable = s.observable.canonical();
        writeln!(out, "{i} {} [{}] {observable}", s.action, s.rule)?;
    }
    if let Some(h) = &run.halt {
        let action = &trace.steps[h.index].action;
        match &h.reason {
            tsm_core::session::HaltReason::Undefined => {
                writeln!(out, "halted at step {}: no rule for {action}", h.index)?;
                writeln!(out, "{}", halt_prompt(h.index))?;
            }
            tsm_core::session::HaltReason::Error(e) => {
                writeln!(out, "halted at step {}: {action} failed: {e}", h.index)?;
            }
        }
    }
    Ok(code)
}

fn explore_cmd(
    path: &Path,
    args: &UniverseArgs,
    dot: Option<&Path>,
    graph_json: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
) -> Result<u8> {
    let model = load(path)?;
    let e = explore(&model, &args.universe(), args.max_states)?;
    if let Some(p) = dot {
        fs::write(p, export_graph(&e, GraphFormat::Dot)).with_context(|| format!("cannot write {}", p.display()))?;
    }
    if let Some(p) = graph_json {
        fs::write(p, export_graph(&e, GraphFormat::Json)).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let code = if e.invariant_violations.is_empty() { EXIT_OK } else { EXIT_FINDINGS };
    if json {
        emit(out, &exploration_json(&model, &e))?;
        return Ok(code);
    }
    writeln!(
        out,
        "{}: {}, {}, {}, {}",
        model.name,
        plural(e.states.len(), "state"),
        plural(e.transitions.len(), "transition"),
        plural(e.undefined.len(), "undefined pair"),
        plural(e.deadlocks.len(), "deadlock")
    )?;
    if e.frontier_truncated {
        writeln!(out, "truncated: stopped admitting states at {}", args.max_states)?;
    }
    if e.list_bound_pruned > 0 {
        writeln!(
            out,
            "pruned {} past the list length bound {}",
            plural(e.list_bound_pruned, "successor"),
            e.universe.max_list_len
        )?;
    }
    for u in &e.undefined {
        writeln!(out, "undefined: {} in {}", u.action, e.states[u.state].key)?;
    }
    for &d in &e.deadlocks {
        writeln!(out, "deadlock: {}", e.states[d].key)?;
    }
    for o in &e.overlaps {
        writeln!(out, "overlap: {} and {} on {} in {}", o.first, o.second, o.action, e.states[o.state].key)?;
    }
    for v in &e.invariant_violations {
        let path: Vec<String> = v.path.iter().map(|a| a.to_string()).collect();
        writeln!(out, "invariant {} violated in {} after [{}]", v.invariant, e.states[v.state].key, path.join(", "))?;
    }
    for f in &e.eval_failures {
        let what = match (&f.action, &f.invariant) {
            (Some(a), _) => a.to_string(),
            (None, Some(i)) => format!("invariant {i}"),
            (None, None) => String::new(),
        };
        writeln!(out, "evaluation failed: {what} in {}: {}", e.states[f.state].key, f.error)?;
    }
    Ok(code)
}

fn conform(path: &Path, trace_path: &Path, strict_order: bool, json: bool, out: &mut dyn Write) -> Result<u8> {
    let model = load(path)?;
    let trace = load_trace(&model, trace_path)?;
    let order = if strict_order { ListOrder::Strict } else { ListOrder::IdKeyed };
    let report = check_conformance(&model, &trace, order)?;
    let actions: Vec<_> = trace.actions().cloned().collect();
    let code = if report.is_conformant() { EXIT_OK } else { EXIT_FINDINGS };
    if json {
        emit(out, &divergence_json(&model, &actions, &report))?;
        return Ok(code);
    }
    let at = |i: Option<usize>| i.map(|i| (i, &actions[i])).expect("non-conformant reports carry an index");
    match report.status {
        DivergenceStatus::Conformant => writeln!(out, "conformant: {} match", plural(trace.len(), "step"))?,
        DivergenceStatus::Diverged => {
            let (i, a) = at(report.step_index);
            let rule = report.fired_rule.as_deref().unwrap_or("?");
            writeln!(out, "diverged at step {i}: {a} fired {rule}")?;
            if let (Some(e), Some(x)) = (&report.expected, &report.actual) {
                writeln!(out, "  expected {}", e.canonical())?;
                writeln!(out, "  actual   {}", x.canonical())?;
            }
        }
        DivergenceStatus::ModelUndefined => {
            let (i, a) = at(report.step_index);
            let state = report.state_at_divergence.as_ref().map(|s| s.canonical()).unwrap_or_default();
            writeln!(out, "model undefined at step {i}: no rule for {a}")?;
            writeln!(out, "{}", undefined_prompt(&a.name, &state))?;
        }
        DivergenceStatus::ModelError => {
            let (i, a) = at(report.step_index);
            let error = report.error.as_ref().map(|e| e.to_string()).unwrap_or_default();
            writeln!(out, "model error at step {i}: {a} failed: {error}")?;
        }
    }
    Ok(code)
}

fn section_lines<C>(out: &mut dyn Write, kind: &str, s: &Section<C>, changed: impl Fn(&C) -> String) -> Result<()> {
    for a in &s.added {
        writeln!(out, "+ {kind} {a}")?;
    }
    for r in &s.removed {
        writeln!(out, "- {kind} {r}")?;
    }
    for c in &s.changed {
        writeln!(out, "~ {kind} {}", changed(c))?;
    }
    Ok(())
}

fn diff_text(out: &mut dyn Write, d: &ModelDiff) -> Result<()> {
    let retyped = |r: &tsm_core::analysis::Retyped| format!("{}: {} -> {}", r.name, r.old, r.new);
    if let Some(r) = &d.renamed {
        writeln!(out, "~ model {} -> {}", r.old, r.new)?;
    }
    section_lines(out, "enum", &d.enums, |e| {
        let mut parts = Vec::new();
        parts.extend(e.added_members.iter().map(|m| format!("+{m}")));
        parts.extend(e.removed_members.iter().map(|m| format!("-{m}")));
        if parts.is_empty() {
            parts.push("members reordered".into());
        }
        format!("{}: {}", e.name, parts.join(" "))
    })?;
    section_lines(out, "record", &d.records, |r| {
        let mut parts = Vec::new();
        parts.extend(r.added_fields.iter().map(|f| format!("+{f}")));
        parts.extend(r.removed_fields.iter().map(|f| format!("-{f}")));
        parts.extend(r.retyped_fields.iter().map(|f| format!("{}: {} -> {}", f.name, f.old, f.new)));
        if parts.is_empty() {
            parts.push("fields reordered".into());
        }
        format!("{}: {}", r.name, parts.join(" "))
    })?;
    section_lines(out, "var", &d.state_vars, retyped)?;
    section_lines(out, "init", &d.init, retyped)?;
    section_lines(out, "action", &d.actions, retyped)?;
    section_lines(out, "rule", &d.rules, |r| format!("{} ({})\n    old: {}\n    new: {}", r.label, r.kinds.join(", "), r.old, r.new))?;
    if let Some(o) = &d.rule_order {
        writeln!(out, "~ rule order: [{}] -> [{}]", o.old, o.new)?;
    }
    section_lines(out, "observe", &d.observe, retyped)?;
    section_lines(out, "invariant", &d.invariants, retyped)?;
    section_lines(out, "meta", &d.meta, retyped)?;
    Ok(())
}

fn diff(old: &Path, new: &Path, json: bool, out: &mut dyn Write) -> Result<u8> {
    let (a, b) = (load(old)?, load(new)?);
    let d = diff_models(&a, &b);
    let code = if d.is_empty() { EXIT_OK } else { EXIT_FINDINGS };
    if json {
        let mut value = serde_json::to_value(&d)?;
        value["empty"] = Json::Bool(d.is_empty());
        emit(out, &value)?;
        return Ok(code);
    }
    if d.is_empty() {
        writeln!(out, "no differences")?;
    } else {
        diff_text(out, &d)?;
    }
    Ok(code)
}

fn questions(path: &Path, args: &UniverseArgs, json: bool, out: &mut dyn Write) -> Result<u8> {
    let model = load(path)?;
    let e = explore(&model, &args.universe(), args.max_states)?;
    let report = questions_report(&model, &e)?;
    let code = if report.questions.is_empty() { EXIT_OK } else { EXIT_FINDINGS };
    if json {
        emit(out, &serde_json::to_value(&report)?)?;
        return Ok(code);
    }
    writeln!(out, "{}: {}", model.name, plural(report.questions.len(), "question"))?;
    if report.truncated {
        writeln!(out, "exploration truncated at {} states; unreachable members not reported", args.max_states)?;
    }
    for (i, q) in report.questions.iter().enumerate() {
        writeln!(out, "{}. [{}] {}", i + 1, q.kind.name(), q.prompt)?;
    }
    Ok(code)
}
