//! Runs the ten acceptance criteria and prints one PASS/FAIL line each.
//!
//! Criterion 4 is expected to fail on its grid-solver clause: the wide-band
//! mean-field equation G = g R closes on a semicircle of half width
//! sqrt(3 g), not on the Lorentzian of half width sqrt(g). Its two closed-form
//! clauses must still hold.
//!
//! Runs without the libtest harness so the lines always reach the output.

use resolvent_spectra::selfcheck;

fn main() {
    let results = selfcheck::run_all();
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("failed criteria: {failed:?}");
    assert_eq!(failed, vec![4], "unexpected acceptance outcome");
    let c4 = &results[3];
    assert_eq!(c4.detail.matches("[ok]").count(), 2, "{}", c4.detail);
    assert_eq!(c4.detail.matches("[fail]").count(), 1, "{}", c4.detail);
    assert!(c4.detail.contains("half-width"), "{}", c4.detail);
}
