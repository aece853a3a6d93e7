//! Tempered overfitting of the shortest interpolator under label noise.
//!
//! Runs the full experiment loop: sample from a noisy source, find the
//! shortest perfect fit, measure its population error, and audit the
//! result against the length and divergence bounds. With noise rate 1/4
//! the interpolator's test error settles near 2 L* (1 - L*) = 0.375,
//! clearly above the noise floor yet clearly below chance.
//!
//! Run with: cargo run --release --example tempered_overfitting

use mdl_lab::bitlang::Expr;
use mdl_lab::experiments::run_experiment;
use mdl_lab::sources::{SourceModel, SourceSpec};

fn main() {
    let spec = SourceSpec::new(
        SourceModel::RandomLabelNoise {
            h_star: Expr::Bit(1),
            noise_num: 1,
            noise_den: 4,
        },
        42,
    )
    .expect("valid source");
    let (m, trials, max_len, lambda) = (12, 20, 34, 1.0);

    let report = run_experiment(&spec, m, trials, max_len, lambda);

    println!(
        "{} trials at m={}, search budget {} bits, lambda {}",
        report.trials, report.m, report.max_len, report.lambda
    );
    println!("exhausted searches: {}", report.exhausted_count);
    println!(
        "interpolator length: {:.2} +- {:.2} bits",
        report.mdl_len.mean, report.mdl_len.std_err
    );
    println!(
        "interpolator test error: {:.4} +- {:.4}  (noise floor 0.25, chance 0.5)",
        report.mdl_test_error.mean, report.mdl_test_error.std_err
    );
    println!(
        "penalized rule test error: {:.4} +- {:.4}",
        report.srm_test_error.mean, report.srm_test_error.std_err
    );

    if let Some(length) = &report.audits.length {
        println!(
            "length audit: bound {:.4}, slack {:.4} ({})",
            length.bound,
            length.slack,
            if length.pass { "ok" } else { "violated" }
        );
    }
    if let Some(kl) = &report.audits.kl {
        println!(
            "divergence audit: observed {:.4} <= budget {:.4} ({})",
            kl.observed_kl,
            kl.budget,
            if kl.pass { "ok" } else { "violated" }
        );
    }
    if let Some(band) = &report.audits.band {
        println!(
            "error band: [{:.4}, {:.4}] contains mean {:.4} ({})",
            band.lo,
            band.hi,
            band.mean_test_error,
            if band.pass { "ok" } else { "violated" }
        );
    }
}
