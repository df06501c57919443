//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::process::ExitCode;
use std::time::Instant;

use sixcyl_core::report::{self, CriterionResult, ReportOptions};

type Check<'a> = (&'static str, Box<dyn Fn() -> CriterionResult + 'a>);

fn main() -> ExitCode {
    let opts = ReportOptions::default();
    let checks: [Check; 13] = [
        ("record_values", Box::new(|| report::record_values(&opts))),
        (
            "full_configuration",
            Box::new(|| report::full_configuration(&opts)),
        ),
        (
            "three_way_consistency",
            Box::new(|| report::three_way_consistency(&opts)),
        ),
        (
            "curve_identities",
            Box::new(|| report::curve_identities(&opts)),
        ),
        ("unimodality", Box::new(report::unimodality)),
        ("initial_point", Box::new(report::initial_point)),
        ("four_cylinders", Box::new(report::four_cylinders)),
        ("unlocking", Box::new(report::unlocking)),
        ("alternate_strategy", Box::new(report::alternate_strategy)),
        (
            "series_validation",
            Box::new(|| report::series_validation(&opts)),
        ),
        ("optimizer", Box::new(|| report::optimizer(&opts))),
        ("local_probe", Box::new(|| report::local_probe(&opts))),
        ("pure_geodetic", Box::new(report::pure_geodetic)),
    ];

    let mut failed = 0;
    for (name, check) in &checks {
        let start = Instant::now();
        let r = check();
        let flag = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "{flag} criterion {:>2} {name} ({:.2}s): {}",
            r.id,
            start.elapsed().as_secs_f64(),
            r.detail
        );
        if !r.passed {
            failed += 1;
        }
    }

    // The fault hook must be caught by the record checks.
    let faulty = ReportOptions::with_fault();
    let caught =
        !report::record_values(&faulty).passed && !report::full_configuration(&faulty).passed;
    println!(
        "{} self-test: perturbed record point is rejected",
        if caught { "PASS" } else { "FAIL" }
    );
    if !caught {
        failed += 1;
    }

    println!(
        "acceptance: {} passed, {failed} failed",
        checks.len() + 1 - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
