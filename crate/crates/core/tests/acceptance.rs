// Every acceptance criterion at the default budget: 2·10⁵ draws, 512
// steps per unit time, seed 42. One line per criterion goes to stderr
// whether or not output is captured.
//
// Criterion 13 is red on purpose. Its δ = 50 limit is checked against
// e^{−λ cosh x} itself, while the estimator at finite δ carries a bias of
// order 1/δ that is about a hundred standard errors at this budget.

use std::io::Write;

use hypbessel::acceptance::{run_acceptance_with, AcceptanceConfig};

const EXPECTED_RED: [u8; 1] = [13];

fn line(s: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{s}");
}

#[test]
fn acceptance_criteria() {
    let config = AcceptanceConfig { negative_controls: true, ..Default::default() };
    assert_eq!((config.seed.0, config.n, config.steps_per_unit), (42, 200_000, 512));

    let report = run_acceptance_with(&config, |c, took| line(&format!("{}  [{:.1}s]", c.summary(), took.as_secs_f64())))
        .expect("acceptance run");
    for c in &report.controls {
        line(&format!("{} control {}: {:.4} vs {:.4}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.statistic, c.threshold));
    }

    assert_eq!(report.criteria.len(), 15);
    assert!(report.controls.iter().all(|c| c.pass), "{:#?}", report.controls);
    assert_eq!(report.failed(), EXPECTED_RED, "unexpected verdicts");

    let c13 = &report.criteria[12];
    let red: Vec<_> = c13.checks.iter().filter(|c| c.gated && !c.pass).map(|c| c.name.as_str()).collect();
    assert_eq!(red.len(), 1, "{red:?}");
    assert!(red[0].starts_with("δ=50"), "{red:?}");
    assert!(!report.pass);
}
