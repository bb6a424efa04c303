//! Randomised invariant sweeps, one line each.

use nmlkit_core::verify::{run_sweeps, VerifyOptions};

#[test]
fn invariant_sweeps() {
    let reports = run_sweeps(&VerifyOptions::default());
    for r in &reports {
        println!("{}", r.line());
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.line()).collect();
    assert!(failed.is_empty(), "failed sweeps:\n{}", failed.join("\n"));
}
