//! How wide a prefix a sample needs before its points separate.
//!
//! Interpolator constructions hash a prefix of each instance, so their
//! length depends on the sample's disambiguation width b_S: the shortest
//! prefix on which all sampled instances differ. For uniform bits a
//! birthday argument keeps b_S near 2 log2 m, so the averaged log-width
//! stays under log2(4 log2 m). The demo measures this across sample
//! sizes, alongside the exact worst-case prefix entropy.
//!
//! Run with: cargo run --example quench

use mdl_lab::experiments::quench;
use mdl_lab::sources::{min_entropy_prefix, SourceModel, SourceSpec};

fn main() {
    let spec = SourceSpec::new(SourceModel::AllZerosY, 42).expect("valid source");

    println!(
        "{:>5} {:>10} {:>10} {:>8}",
        "m", "quenched", "threshold", "within"
    );
    for m in [8usize, 16, 32, 64, 128, 256] {
        let report = quench(&spec, m, 30).expect("trials run");
        println!(
            "{m:>5} {:>10.4} {:>10.4} {:>8}",
            report.quenched,
            report.threshold,
            report.quenched <= report.threshold
        );
    }

    // Uniform instance bits have full prefix entropy: b bits of prefix
    // carry exactly b bits, so hashing prefixes loses nothing.
    println!();
    for b in [1u64, 8, 32, 64] {
        println!(
            "min-entropy of the {b:>2}-bit prefix: {}",
            min_entropy_prefix(&spec, b)
        );
    }
}
