//! Run verification suites and print one PASS/FAIL line per check.
//!
//! ```text
//! cargo run --release --example verify_suites -- [SUITE ...] [--standard] [--seed N]
//! ```
//!
//! With no suite arguments every suite runs. The default scale is `quick`
//! (a fast smoke of the same checks); `--standard` switches to the
//! calibrated replica counts. Exits nonzero if any check fails.

use std::process::ExitCode;

use stitlab::verify::{run_suite, SuiteParams, SuiteScale, SUITE_NAMES};

fn main() -> ExitCode {
    let mut suites: Vec<String> = Vec::new();
    let mut params = SuiteParams {
        master_seed: 17,
        scale: SuiteScale::Quick,
    };
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--standard" => params.scale = SuiteScale::Standard,
            "--quick" => params.scale = SuiteScale::Quick,
            "--seed" => {
                let v = args.next().expect("--seed needs a value");
                params.master_seed = v.parse().expect("--seed needs an integer");
            }
            name => suites.push(name.to_string()),
        }
    }
    if suites.is_empty() {
        suites = SUITE_NAMES.iter().map(|s| s.to_string()).collect();
    }

    let mut all_pass = true;
    for name in &suites {
        let report = match run_suite(name, &params) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
        };
        for line in report.summary_lines() {
            println!("{line}");
        }
        println!(
            "suite {} => {} ({} checks, {} replicas, {} ms)",
            report.suite,
            if report.pass { "PASS" } else { "FAIL" },
            report.checks.len(),
            report.replicas,
            report.wall_ms
        );
        all_pass &= report.pass;
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
