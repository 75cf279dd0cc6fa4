//! Runs the `tsm` binary over the fixtures and compares everything it prints
//! (exit code, stdout, stderr and any files it writes) with committed goldens.
//!
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p tsm-cli --test golden`.

#[path = "support/golden_cases.rs"]
mod golden_cases;

use std::fs;
use std::process::{Command, Stdio};

use golden_cases::{cases, data, fixture, golden_dir, mismatches, workspace_root, TL, TODO};

#[test]
fn cli_output_matches_goldens() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let failed = mismatches(update);
    assert!(failed.is_empty(), "{} golden mismatch(es)\n{}", failed.len(), failed.join("\n"));
}

#[test]
fn every_golden_has_a_case() {
    let names: Vec<String> = cases().iter().map(|c| format!("{}.txt", c.name)).collect();
    for entry in fs::read_dir(golden_dir()).unwrap() {
        let file = entry.unwrap().file_name().into_string().unwrap();
        assert!(names.contains(&file), "stale golden {file}");
    }
}

/// Exit codes are part of the contract, so pin the important ones directly
/// as well as through the goldens.
#[test]
fn exit_codes() {
    let code = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_tsm"))
            .args(args)
            .current_dir(workspace_root())
            .stdin(Stdio::null())
            .output()
            .unwrap()
            .status
            .code()
            .unwrap()
    };
    assert_eq!(code(&["check", TL]), 0);
    assert_eq!(code(&["check", TODO, "--strict"]), 1);
    assert_eq!(code(&["check", &data("missing_init.tsm")]), 2);
    assert_eq!(code(&["conform", TL, &fixture("trafficlight_cycle.json")]), 0);
    assert_eq!(code(&["conform", TL, &data("trafficlight_mutated.json")]), 1);
    assert_eq!(code(&["diff", TL, &data("trafficlight_r1_edit.tsm")]), 1);
    assert_eq!(code(&["questions", &data("one_state.tsm")]), 0);
    assert_eq!(code(&["questions", TL]), 1);
    assert_eq!(code(&["nonsense"]), 2);
}
