//! Asymptotic error curves for the shortest-interpolator rule.
//!
//! Prints, for a grid of noise/disagreement rates, the two closed-form
//! limits of the interpolator's population error: the agnostic envelope
//! `1 - 2^(-H(alpha))` and the label-noise value `2 L* (1 - L*)`. Both
//! start at 0, meet at 1/2, and sit strictly between the rate itself and
//! 1/2 in the interior: overfitting is tempered, not catastrophic.
//!
//! Run with: cargo run --example curves

use mdl_lab::experiments::{curves_csv, tempering_curves};

fn main() {
    let rows = tempering_curves(0.05);

    println!("{:>6} {:>10} {:>10} {:>10}", "rate", "envelope", "noise", "ceiling");
    for r in &rows {
        println!(
            "{:>6.2} {:>10.6} {:>10.6} {:>10.2}",
            r.alpha, r.l_ag, r.l_samp, 0.5
        );
    }

    // The same table in the CSV layout the CLI emits.
    println!("\n{}", curves_csv(&tempering_curves(0.1)).trim_end());
}
