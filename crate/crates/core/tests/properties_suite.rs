//! Module invariants from the self-test suite, one test per property.

use jetsym::selftest::{properties, Context};
use jetsym::Oracle;

fn run(name: &str) {
    let all = properties();
    let (i, check) = all.iter().enumerate().find(|(_, c)| c.name == name).expect("known property");
    let r = check.run(&Context { oracle: Oracle::default(), stream: 100 + i as u64 });
    println!("{}: {} ({} ms)", r.name, r.detail, r.elapsed_ms);
    assert!(r.passed, "{}: {}", r.name, r.detail);
}

#[test]
fn every_property_holds() {
    for check in properties() {
        run(check.name);
    }
}
