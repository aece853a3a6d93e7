//! Numeric verification of the inequalities behind the error bounds.
//!
//! Sweeps each inequality the analysis relies on over a dense grid and
//! reports the worst-case gap. A negative minimum beyond tolerance would
//! falsify the corresponding step; every check is expected to pass.
//!
//! Run with: cargo run --release --example verify_lemmas
//! (the entropy dedup sweep covers ~70M cases; release mode is worth it)

use mdl_lab::experiments::verify_lemmas;

fn main() {
    let report = verify_lemmas();
    for c in &report.checks {
        println!(
            "{:<36} {:>9} cases  gap in [{:.3e}, {:.3e}]  {}",
            c.name,
            c.cases,
            c.min_gap,
            c.max_gap,
            if c.pass { "ok" } else { "FAILED" }
        );
    }
    println!("\noverall: {}", if report.pass { "ok" } else { "FAILED" });
    std::process::exit(if report.pass { 0 } else { 1 });
}
