//! Acceptance criteria, one line each.
//!
//! Positional arguments filter criteria by name or number. `SPECLAG_FULL=1`
//! runs the conservation criterion at N = 48 instead of the N = 32 smoke
//! size. Criteria listed in `EXPECTED_FAILURES` must fail; the binary exits
//! nonzero if any other criterion fails or a listed one starts passing.

use std::process::ExitCode;

use speclag::validate::{run, Criterion, Scale};

/// Criteria that do not reproduce, with the measured reason.
const EXPECTED_FAILURES: &[(Criterion, &str)] = &[
    (
        Criterion::Oracle,
        "at N = 16 the spectral operator is under-resolved (error 7e-3 vs 2e-8 \
         for the quadrature), so the two distances cannot agree within 2x",
    ),
    (
        Criterion::Fits,
        "the dilated cylindrical pdf has energy exactly 1.5, so the energy \
         fit gives k = 1.0 and a much larger c than the tabulated envelope",
    ),
    (
        Criterion::Relaxation,
        "the mixture is still relaxing at t = 15 (gap 1.9e-4, below 1e-4 only \
         after t = 18); the absorbing wall depletes the plasma's left tail \
         and makes density and energy dip early",
    ),
];

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let scale = match std::env::var("SPECLAG_FULL").as_deref() {
        Ok("1") => Scale::Full,
        _ => Scale::Smoke,
    };
    let selected: Vec<Criterion> = Criterion::ALL
        .into_iter()
        .filter(|c| {
            filters.is_empty()
                || filters
                    .iter()
                    .any(|f| c.name().contains(f.as_str()) || c.id().to_string() == *f)
        })
        .collect();

    println!("running {} acceptance criteria ({scale:?})", selected.len());
    let mut unexpected = 0;
    for c in selected {
        let expected = EXPECTED_FAILURES.iter().find(|(e, _)| *e == c);
        match run(c, scale) {
            Ok(report) => {
                let tag = match (report.passed(), expected) {
                    (true, None) | (false, Some(_)) => "",
                    (true, Some(_)) => "  <- expected to fail",
                    (false, None) => "  <- unexpected",
                };
                println!("{}{tag}", report.line());
                for check in &report.checks {
                    println!("    {check}");
                }
                if let (false, Some((_, why))) = (report.passed(), expected) {
                    println!("    known: {why}");
                }
                if report.passed() == expected.is_some() {
                    unexpected += 1;
                }
            }
            Err(e) => {
                println!("criterion {:>2} {:<13} ERROR  {e}", c.id(), c.name());
                unexpected += 1;
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria did not match expectations");
        ExitCode::FAILURE
    }
}
