mod support;

use cwtoric_core::oracle::DEFAULT_CAP;

#[test]
fn example_spaces() {
    let failed: Vec<_> = support::goldens().into_iter().filter_map(|(n, r)| r.err().map(|m| format!("{n}: {m}"))).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn oracle_agrees_on_every_small_instance() {
    let inst = support::oracle_instances(DEFAULT_CAP);
    assert!(inst.len() >= 20);
    for (name, c, n, g) in &inst {
        support::oracle_instance(c, *n, g, DEFAULT_CAP).unwrap_or_else(|m| panic!("{name}: {m}"));
    }
}

#[test]
fn oracle_energies() {
    let failures = support::run_cases(20, 0, |s| support::oracle_energy(s, DEFAULT_CAP));
    assert!(failures.is_empty(), "{failures:?}");
}
