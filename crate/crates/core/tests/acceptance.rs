//! Acceptance suite: every verification check at its stated tolerance, one
//! line per check.

use std::process::ExitCode;
use std::time::Instant;

use cbs_core::verify::{VerifyOptions, CHECKS};

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let verbose = std::env::var_os("CBS_VERBOSE").is_some();
    let start = Instant::now();
    let mut failed = 0;
    for check in &CHECKS {
        let t = Instant::now();
        let report = check.run(&opts);
        println!("{} [{:.1}s]", report.line(), t.elapsed().as_secs_f64());
        if verbose || !report.passed {
            for d in &report.details {
                println!("      {d}");
            }
        }
        failed += usize::from(!report.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        CHECKS.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
