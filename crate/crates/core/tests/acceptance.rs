//! Runs the ten acceptance criteria, printing one PASS/FAIL line each.
//! Tolerances and runtime budgets are pinned in `validation::tol`.
//!
//! This target has no libtest harness so the lines are never captured.

use std::process::ExitCode;

use ushaptic_core::validation::{criterion_ids, run_criterion};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in criterion_ids() {
        let report = run_criterion(id).expect("known criterion");
        println!("{}", report.line());
        if !report.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
