//! The `verify` subcommand: statistical suites with one pass/fail line each.

use dsieve_core::verify::all_suites;

use crate::output::{write_records, SuiteRecord};
use crate::{usage_error, VerifyArgs};

pub fn cmd_verify(args: VerifyArgs) -> i32 {
    let seed = crate::resolve_seed(args.common.seed).unwrap_or_else(|e| usage_error(&e));
    println!("verify seed={seed} significance={}", dsieve_core::verify::SIGNIFICANCE);

    let suites = all_suites(seed);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for suite in &suites {
        println!(
            "suite {}: {} ({})",
            suite.name,
            if suite.pass { "PASS" } else { "FAIL" },
            suite.detail
        );
        if !suite.pass {
            failures.push(suite.name);
        }
        records.push(SuiteRecord {
            suite: suite.name.to_string(),
            pass: suite.pass,
            detail: suite.detail.clone(),
        });
    }
    println!(
        "verify summary: {}/{} suites passed",
        suites.len() - failures.len(),
        suites.len()
    );

    if let Some(path) = &args.common.out {
        if let Err(err) = write_records(path, &args.common.format, &records) {
            eprintln!("error: {err}");
            return 1;
        }
    }
    if failures.is_empty() {
        0
    } else {
        eprintln!("failing suites: {}", failures.join(", "));
        1
    }
}
