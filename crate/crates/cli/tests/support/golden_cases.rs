//! The golden CLI cases: each runs the `tsm` binary from the workspace root
//! and renders exit code, stdout, stderr and written files as one text.

#![allow(dead_code)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub const TL: &str = "crates/core/fixtures/trafficlight.tsm";
pub const TODO: &str = "crates/core/fixtures/mytodo.tsm";
pub const TODO_EXPIRE: &str = "crates/core/fixtures/mytodo_expire.tsm";
pub const DATA: &str = "crates/cli/tests/data";

pub struct Case {
    pub name: &'static str,
    pub args: Vec<String>,
    pub stdin: &'static str,
    /// Names of files the command writes into its scratch directory.
    pub outputs: &'static [&'static str],
}

pub fn case(name: &'static str, args: &[&str]) -> Case {
    Case { name, args: args.iter().map(|a| a.to_string()).collect(), stdin: "", outputs: &[] }
}

pub fn data(file: &str) -> String {
    format!("{DATA}/{file}")
}

pub fn fixture(file: &str) -> String {
    format!("crates/core/fixtures/{file}")
}

pub fn cases() -> Vec<Case> {
    let tl_cycle = fixture("trafficlight_cycle.json");
    let tl_switch = fixture("trafficlight_manualswitch.json");
    let todo_golden = fixture("mytodo_golden.json");
    let todo_prediction = fixture("mytodo_prediction.json");
    let missing_init = data("missing_init.tsm");
    let invariant = data("trafficlight_invariant.tsm");
    let one_state = data("one_state.tsm");
    let r1_edit = data("trafficlight_r1_edit.tsm");
    let mutated = data("trafficlight_mutated.json");
    let empty = data("trafficlight_empty.json");
    let unobserved = data("mytodo_unobserved.json");
    let malformed = data("malformed.json");
    vec![
        case("check_trafficlight", &["check", TL]),
        case("check_trafficlight_json", &["check", TL, "--json"]),
        case("check_mytodo", &["check", TODO]),
        case("check_mytodo_strict", &["check", TODO, "--strict"]),
        case("check_mytodo_strict_json", &["check", TODO, "--strict", "--json"]),
        case("check_mytodo_expire", &["check", TODO_EXPIRE]),
        case("check_missing_init", &["check", &missing_init]),
        case("check_missing_init_json", &["check", &missing_init, "--json"]),
        case("check_missing_file", &["check", "no/such/model.tsm"]),
        case("sim_trafficlight_cycle", &["sim", TL, &tl_cycle]),
        case("sim_trafficlight_cycle_json", &["sim", TL, &tl_cycle, "--json"]),
        case("sim_trafficlight_manualswitch", &["sim", TL, &tl_switch]),
        case("sim_trafficlight_manualswitch_json", &["sim", TL, &tl_switch, "--json"]),
        case("sim_trafficlight_empty", &["sim", TL, &empty]),
        case("sim_mytodo_golden", &["sim", TODO, &todo_golden]),
        case("sim_mytodo_golden_json", &["sim", TODO, &todo_golden, "--json"]),
        case("sim_malformed_trace", &["sim", TL, &malformed]),
        case("sim_wrong_model", &["sim", TODO, &tl_cycle]),
        Case {
            stdin: "fire timerflip\nfire timerflip\nfire manualswitch\nundo\nshow\nbogus\nquit\n",
            ..case("step_trafficlight", &["step", TL])
        },
        Case { stdin: "fire timerflip\nundo\nundo\nreset\n", ..case("step_trafficlight_undo", &["step", TL]) },
        Case {
            stdin: "fire Add t1\nfire Add t2\nfire MarkDone t1\nfire Add\nfire Remove t9\nquit\n",
            ..case("step_mytodo", &["step", TODO, "--ids", "t1,t2", "--max-list", "2"])
        },
        case("explore_trafficlight", &["explore", TL]),
        case("explore_trafficlight_json", &["explore", TL, "--json"]),
        case("explore_trafficlight_truncated", &["explore", TL, "--max-states", "1"]),
        case("explore_trafficlight_zero_states", &["explore", TL, "--max-states", "0"]),
        Case {
            outputs: &["graph.dot", "graph.json"],
            ..case("explore_trafficlight_exports", &["explore", TL, "--dot", "{out}/graph.dot", "--graph-json", "{out}/graph.json"])
        },
        case("explore_trafficlight_invariant", &["explore", &invariant]),
        case("explore_mytodo", &["explore", TODO, "--ids", "t1", "--max-list", "2"]),
        case("explore_mytodo_json", &["explore", TODO, "--ids", "t1,t2", "--max-list", "2", "--json"]),
        Case {
            outputs: &["graph.dot"],
            ..case("explore_mytodo_dot", &["explore", TODO, "--ids", "t1", "--max-list", "1", "--dot", "{out}/graph.dot"])
        },
        case("conform_trafficlight_cycle", &["conform", TL, &tl_cycle]),
        case("conform_trafficlight_mutated", &["conform", TL, &mutated]),
        case("conform_trafficlight_mutated_json", &["conform", TL, &mutated, "--json"]),
        case("conform_trafficlight_manualswitch", &["conform", TL, &tl_switch]),
        case("conform_trafficlight_empty", &["conform", TL, &empty]),
        case("conform_mytodo_golden", &["conform", TODO, &todo_golden]),
        case("conform_mytodo_golden_strict_order", &["conform", TODO, &todo_golden, "--strict-order"]),
        case("conform_mytodo_prediction", &["conform", TODO, &todo_prediction]),
        case("conform_mytodo_prediction_json", &["conform", TODO, &todo_prediction, "--json"]),
        case("conform_mytodo_unobserved", &["conform", TODO, &unobserved]),
        case("diff_trafficlight_identity", &["diff", TL, TL]),
        case("diff_trafficlight_guard_edit", &["diff", TL, &r1_edit]),
        case("diff_trafficlight_guard_edit_json", &["diff", TL, &r1_edit, "--json"]),
        case("diff_mytodo_expire", &["diff", TODO, TODO_EXPIRE]),
        case("diff_mytodo_expire_reverse", &["diff", TODO_EXPIRE, TODO]),
        case("diff_mytodo_expire_json", &["diff", TODO, TODO_EXPIRE, "--json"]),
        case("questions_trafficlight", &["questions", TL]),
        case("questions_trafficlight_json", &["questions", TL, "--json"]),
        case("questions_mytodo", &["questions", TODO, "--ids", "t1,t2", "--max-list", "2"]),
        case("questions_mytodo_json", &["questions", TODO, "--ids", "t1", "--max-list", "1", "--json"]),
        case("questions_one_state", &["questions", &one_state]),
    ]
}

/// Runs one case and renders everything observable about it as text.
pub fn run(case: &Case) -> String {
    let scratch = tempfile::tempdir().unwrap();
    let out_dir = scratch.path().to_str().unwrap();
    let args: Vec<String> = case.args.iter().map(|a| a.replace("{out}", out_dir)).collect();
    let mut child = Command::new(env!("CARGO_BIN_EXE_tsm"))
        .args(&args)
        .current_dir(workspace_root())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(case.stdin.as_bytes()).unwrap();
    let output = child.wait_with_output().unwrap();
    let mut text = format!("$ tsm {}\n", case.args.join(" "));
    text += &format!("exit: {}\n", output.status.code().unwrap());
    text += "--- stdout\n";
    text += &String::from_utf8(output.stdout).unwrap();
    text += "--- stderr\n";
    text += &String::from_utf8(output.stderr).unwrap();
    for file in case.outputs {
        text += &format!("--- {file}\n");
        text += &fs::read_to_string(scratch.path().join(file)).unwrap_or_else(|e| panic!("{file} not written: {e}"));
    }
    text
}

/// Cases whose output differs from the committed golden, as printable
/// reports. With `update` set, rewrites the goldens instead.
pub fn mismatches(update: bool) -> Vec<String> {
    let mut out = Vec::new();
    for case in cases() {
        let actual = run(&case);
        let path = golden_dir().join(format!("{}.txt", case.name));
        if update {
            fs::write(&path, &actual).unwrap();
            continue;
        }
        match fs::read_to_string(&path) {
            Ok(expected) if expected == actual => {}
            Ok(expected) => out.push(format!("{}:\n--- expected\n{expected}\n--- actual\n{actual}", case.name)),
            Err(e) => out.push(format!("missing golden {}: {e}", path.display())),
        }
    }
    out
}
