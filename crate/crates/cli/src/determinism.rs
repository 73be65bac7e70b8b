//! Byte-for-byte reproducibility of every subcommand.

use clap::CommandFactory;
use qwild::acceptance::CriterionResult;

use crate::{run_captured, Cli};

pub const DETERMINISM_ID: u32 = 12;

/// Invocations run twice each; together they cover every subcommand and
/// both output formats.
#[rustfmt::skip]
pub const DETERMINISM_CASES: &[&[&str]] = &[
    &["gram", "--n", "12", "--k", "9", "--brute-check"],
    &["gram", "--n", "10", "--format", "csv"],
    &["dk-sweep", "--n-min", "1", "--n-max", "64"],
    &["dk-sweep", "--n", "100,400", "--format", "csv"],
    &["sww", "--n", "64,256", "--trials", "50", "--seed", "3"],
    &["sww", "--n", "40", "--trials", "5", "--seed", "3", "--trace", "--format", "csv"],
    &["cgt", "--n", "1000", "--k", "1", "--trials", "100", "--seed", "7"],
    &["cgt", "--n", "500", "--k", "8", "--trials", "50", "--seed", "1", "--trace"],
    &["cgt-classical", "--n", "1000", "--k", "8", "--trials", "50", "--seed", "2", "--format", "csv"],
    &["adversary", "--n", "1,2,3,4,5,6"],
    &["reduce", "--k", "1,2,3,4,5,6"],
    &["reduce", "--k", "12", "--trials", "20", "--seed", "5", "--format", "csv"],
    &["all-acceptance", "--only", "10,11"],
];

/// Runs `args` twice and reports how the runs differ, if they do.
pub fn rerun_difference(args: &[&str]) -> Option<String> {
    let argv = || std::iter::once("qwild").chain(args.iter().copied());
    let first = run_captured(argv());
    let second = run_captured(argv());
    if first.0 != 0 {
        return Some(format!(
            "exit status {}: {}",
            first.0,
            String::from_utf8_lossy(&first.2).trim()
        ));
    }
    if first != second {
        return Some("output differs between runs".into());
    }
    None
}

pub fn criterion_12() -> CriterionResult {
    let mut problems = Vec::new();
    for args in DETERMINISM_CASES {
        if let Some(why) = rerun_difference(args) {
            problems.push(format!("`{}`: {why}", args.join(" ")));
        }
    }
    let missing: Vec<String> = Cli::command()
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .filter(|name| !DETERMINISM_CASES.iter().any(|c| c[0] == name))
        .collect();
    if !missing.is_empty() {
        problems.push(format!("not covered: {}", missing.join(", ")));
    }
    let detail = if problems.is_empty() {
        format!(
            "{} invocations covering every subcommand, each run twice: byte-identical",
            DETERMINISM_CASES.len()
        )
    } else {
        problems.join("; ")
    };
    CriterionResult {
        id: DETERMINISM_ID,
        name: "CLI determinism".into(),
        passed: problems.is_empty(),
        detail,
    }
}
