//! One pass/fail line per acceptance criterion, at the stated tolerances.
//! The last line times the complete self-test (criteria plus properties).

use std::time::Instant;

use jetsym::selftest::run_all;
use jetsym::selftest::CheckKind;
use jetsym::Oracle;

fn main() {
    let start = Instant::now();
    let results = run_all(&Oracle::default());
    let secs = start.elapsed().as_secs_f64();
    let mut failed = Vec::new();
    for (i, r) in results.iter().filter(|r| r.kind == CheckKind::Criterion).enumerate() {
        println!(
            "[{}] {:>2}. {} ({} ms, max residual {:.2e}): {}",
            if r.passed { "PASS" } else { "FAIL" },
            i + 1,
            r.name,
            r.elapsed_ms,
            r.max_residual,
            r.detail
        );
        if !r.passed {
            failed.push(r.name.to_string());
        }
    }
    let properties_ok = results.iter().filter(|r| r.kind == CheckKind::Property).all(|r| r.passed);
    let in_time = secs < 300.0;
    println!(
        "[{}] full self-test: {} checks in {secs:.1} s (limit 300 s), properties {}",
        if in_time && properties_ok { "PASS" } else { "FAIL" },
        results.len(),
        if properties_ok { "all pass" } else { "failing" }
    );
    if !in_time || !properties_ok {
        failed.push("full self-test".into());
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
