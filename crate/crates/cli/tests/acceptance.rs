//! Runs every acceptance criterion at full size and prints one line each.

use alh_cli::verify::{run_criterion, SuiteOptions, NAMES, SUITE_BUDGET};
use std::io::Write;
use std::time::Instant;

#[test]
fn all_criteria() {
    let opts = SuiteOptions::default();
    let start = Instant::now();
    let mut failed = Vec::new();
    for id in 1..=NAMES.len() as u8 {
        let o = run_criterion(id, &opts);
        writeln!(std::io::stderr(), "{}", o.line()).unwrap();
        if !o.pass {
            failed.push(id);
        }
    }
    let total = start.elapsed().as_secs_f64();
    writeln!(std::io::stderr(), "total {total:.1} s").unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
    assert!(total < SUITE_BUDGET, "suite took {total:.1} s");
}
