//! Runs the nine-criterion acceptance battery and prints one line each.
//!
//! cargo run --release --example acceptance_suite [seed]

use weighted_dvr::harness::suite::run_suite;
use weighted_dvr::harness::DEFAULT_SEED;

fn main() -> weighted_dvr::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);
    let report = run_suite(seed)?;
    for c in &report.criteria {
        println!(
            "[{}] {} {:<22} {:>7.2}s  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.elapsed.as_secs_f64(),
            c.detail
        );
    }
    Ok(())
}
