//! Acceptance criteria A1 to A9 at full parameters.
//!
//! PASS/FAIL lines go straight to the process stdout so they show up without `--nocapture`.

use std::io::Write;

use clusterlp::core::sdp::default_breakpoints;
use clusterlp::criteria::{Params, Runner, ALL_IDS, DEFAULT_SEED, EXPECTED_BREAKPOINTS};

fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
}

#[test]
fn breakpoints_transcribed_verbatim() {
    // typed in from the published table, independent of both constants
    let table = "0, 0.05, 0.1, 0.2, 0.3, 0.35, 0.38, 0.39, 0.40, 0.405, 0.41, 0.42, 0.44, 0.45, 0.5, 0.55, 0.57, 0.58, 0.6, 0.65, \
                 0.7, 0.75, 0.78, 0.8, 0.9, 0.95, 0.96, 0.99, 1";
    let parsed: Vec<f64> = table.split(',').map(|t| t.trim().parse().unwrap()).collect();
    assert_eq!(parsed, EXPECTED_BREAKPOINTS);
    assert_eq!(default_breakpoints().breakpoints(), &parsed[..]);
}

#[test]
fn acceptance() {
    let runner = Runner::new(Params::full(DEFAULT_SEED));
    let results: Vec<_> = ALL_IDS
        .iter()
        .map(|id| {
            let r = runner.run(id);
            say(&r.line());
            r
        })
        .collect();
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.id.as_str()).collect();
    say(&format!("acceptance: {}/{} criteria passed", results.len() - failed.len(), results.len()));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
