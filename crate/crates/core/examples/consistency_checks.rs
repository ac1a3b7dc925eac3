//! Runs the built-in cross-checks between the region evaluators.
//!
//! Usage: `cargo run --release --example consistency_checks [seed]`

use coopcrib::cli::run_checks;

fn main() {
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    let results = run_checks(seed);
    for r in &results {
        println!("{:<4} {:<45} {}", if r.passed { "ok" } else { "FAIL" }, r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        eprintln!("{failed} check(s) failed");
        std::process::exit(1);
    }
}
