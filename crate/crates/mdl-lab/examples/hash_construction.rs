//! Short interpolators from a seeded hash family.
//!
//! First finds a short seed realizing a prescribed labeling of eight
//! 12-bit prefixes, then repairs a noisy sample: a reference rule plus a
//! hash correction of its residual errors yields an exact interpolator
//! whose length is accounted bit by bit.
//!
//! Run with: cargo run --example hash_construction

use mdl_lab::bitlang::{Expr, Instance};
use mdl_lab::bounds::seed_length_r;
use mdl_lab::hash_family::{assemble_interpolator, composite_code_len, find_seed, hash_predict};
use mdl_lab::learners::train_error;
use mdl_lab::sources::{sample, SourceModel, SourceSpec};

fn main() {
    // Eight distinct 12-bit prefixes, labels alternating 4 true / 4 false.
    let targets: Vec<_> = (0u64..8)
        .map(|v| (Instance(v << 52).prefix(12), v % 2 == 0))
        .collect();
    let (m, k, b) = (8, 4, 12);
    let budget = seed_length_r(m, k, b) + 8;
    let seed = find_seed(&targets, budget).expect("a short seed exists");
    println!("target set: m={m} k={k} b={b}, seed budget {budget}");
    println!("found seed of {} bits: {seed:?}", seed.len());
    for (prefix, want) in &targets {
        let got = hash_predict(&seed, k, m, prefix);
        assert_eq!(got, *want);
    }
    println!("all {m} prescribed labels realized\n");

    // Now the repair construction. Sample from a noisy source, use the
    // true rule as the reference, and hash away its residual mistakes.
    let spec = SourceSpec::new(
        SourceModel::RandomLabelNoise {
            h_star: Expr::Bit(1),
            noise_num: 1,
            noise_den: 4,
        },
        7,
    )
    .expect("valid source");
    let s = sample(&spec, 12, 0).expect("sampling succeeds");
    let built = assemble_interpolator(&Expr::Bit(1), &s).expect("repair fits in budget");

    println!("sample of {} points, reference rule Bit(1)", s.len());
    println!(
        "residuals: {} distinct prefixes, {} ones, prefix width {}",
        built.m_dedup, built.k_dedup, built.b
    );
    println!("composite: {:?}", built.program);
    println!(
        "length: {} bits (reference 4 + opcodes 7 + headers + {} seed bits)",
        built.code_len,
        built.seed.len()
    );
    assert_eq!(
        built.code_len,
        composite_code_len(4, built.m_dedup, built.k_dedup, built.b, built.seed.len())
    );
    let err = train_error(&built.program, &s).expect("composite evaluates");
    assert_eq!(err, 0.0);
    println!("train error of the composite: {err}");
}
