//! Interactive stepping: a line-oriented loop over one simulation session.

use std::fs;
use std::io::{BufRead, Write};
use std::sync::Arc;

use anyhow::Result;
use serde_json::{Map, Value as Json};
use tsm_core::analysis::undefined_prompt;
use tsm_core::model::enabled_actions;
use tsm_core::trace::{action_from_json, write_trace};
use tsm_core::{ActionInstance, Model, Session, StepOutcome, Universe};

use crate::commands::EXIT_OK;

const HELP: &str = "commands: fire <action> [args...], undo, reset, show, record <file>, help, quit";

/// Parses `fire` arguments: one canonical value per parameter, in order.
pub fn parse_fire(model: &Model, words: &[&str]) -> Result<ActionInstance, String> {
    let (name, values) = words.split_first().ok_or("fire needs an action name")?;
    let sig = model.action(name).ok_or_else(|| format!("unknown action {name}"))?;
    if values.len() != sig.params.len() {
        return Err(format!("{name} takes {} argument(s), got {}", sig.params.len(), values.len()));
    }
    let args: Map<String, Json> =
        sig.params.iter().zip(values).map(|((p, _), v)| (p.clone(), Json::String(v.to_string()))).collect();
    action_from_json(model, name, &args)
}

fn show(session: &Session, universe: &Universe, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "state    {}", session.current().canonical())?;
    match session.observable() {
        Ok(y) => writeln!(out, "observe  {}", y.canonical())?,
        Err(e) => writeln!(out, "observe  error: {e}")?,
    }
    let enabled: Vec<String> =
        enabled_actions(session.model(), session.current(), universe).iter().map(|a| a.to_string()).collect();
    let enabled = if enabled.is_empty() { "(none)".to_string() } else { enabled.join(", ") };
    writeln!(out, "enabled  {enabled}")?;
    Ok(())
}

/// Reads commands from `input` until `quit` or end of input, printing a
/// prompt before each one when `prompt` is set.
pub fn run(model: Model, universe: Universe, input: &mut dyn BufRead, out: &mut dyn Write, prompt: bool) -> Result<u8> {
    let mut session = Session::new(Arc::new(model))?;
    writeln!(out, "{}", session.model().name)?;
    writeln!(out, "{HELP}")?;
    show(&session, &universe, out)?;
    let mut line = String::new();
    loop {
        if prompt {
            write!(out, "> ")?;
            out.flush()?;
        }
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some((&command, rest)) = words.split_first() else { continue };
        match command {
            "fire" => match parse_fire(session.model(), rest) {
                Err(e) => writeln!(out, "error: {e}")?,
                Ok(action) => {
                    let before = session.current().canonical();
                    match session.fire(&action) {
                        Ok(StepOutcome::Fired { rule, .. }) => {
                            writeln!(out, "fired {rule}")?;
                            show(&session, &universe, out)?;
                        }
                        Ok(StepOutcome::Undefined) => {
                            writeln!(out, "undefined: {}", undefined_prompt(&action.name, &before))?;
                        }
                        Err(e) => writeln!(out, "error: {action} failed: {e}")?,
                    }
                }
            },
            "undo" => match session.undo() {
                Ok(_) => {
                    writeln!(out, "undone")?;
                    show(&session, &universe, out)?;
                }
                Err(e) => writeln!(out, "error: {e}")?,
            },
            "reset" => {
                session.reset();
                writeln!(out, "reset")?;
                show(&session, &universe, out)?;
            }
            "show" => show(&session, &universe, out)?,
            "record" => match rest {
                [path] => {
                    let text = write_trace(session.model(), session.recorded());
                    match fs::write(path, text) {
                        Ok(()) => writeln!(out, "recorded {} to {path}", plural_steps(session.recorded().len()))?,
                        Err(e) => writeln!(out, "error: cannot write {path}: {e}")?,
                    }
                }
                _ => writeln!(out, "error: record needs one file name")?,
            },
            "help" => writeln!(out, "{HELP}")?,
            "quit" | "exit" => break,
            other => writeln!(out, "unknown command {other}; {HELP}")?,
        }
    }
    writeln!(out, "final    {}", session.current().canonical())?;
    Ok(EXIT_OK)
}

fn plural_steps(n: usize) -> String {
    crate::render::plural(n, "step")
}
