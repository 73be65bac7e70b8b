//! Prints one pass/fail line per acceptance criterion; fails if any fails.

use qwild_cli::commands::criterion;
use qwild_cli::determinism::DETERMINISM_ID;

fn main() {
    let mut failed = Vec::new();
    for id in 1..=DETERMINISM_ID {
        let result = criterion(id).expect("every id up to the determinism check exists");
        println!("{result}");
        if !result.passed {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {DETERMINISM_ID} acceptance criteria passed");
}
