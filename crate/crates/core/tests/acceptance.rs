//! Runs every acceptance suite and prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILING` are reproducibly red for reasons
//! documented in the README. The target exits nonzero if any of them starts
//! passing or any other criterion fails.

use std::process::ExitCode;

use helmstab::verify::{run_suite, SUITES};

const KNOWN_FAILING: [u8; 1] = [8];

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for name in SUITES {
        let reports = match run_suite(name) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("suite {name} errored: {e}");
                return ExitCode::FAILURE;
            }
        };
        for r in reports {
            println!("{}", r.line());
            if r.pass == KNOWN_FAILING.contains(&r.criterion) {
                unexpected.push(r.line());
            }
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected verdicts:\n{}", unexpected.join("\n"));
        ExitCode::FAILURE
    }
}
