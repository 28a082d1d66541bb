//! Acceptance suite: one PASS/FAIL line per criterion, with the individual
//! checks indented beneath it. Exits non-zero if any criterion fails.

use std::process::ExitCode;

use fpi_core::validation::Suite;

fn main() -> ExitCode {
    let suite = Suite::new();
    let mut failed = 0;
    for report in suite.run_all() {
        println!("{report}");
        for line in &report.details {
            println!("    {line}");
        }
        if !report.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
