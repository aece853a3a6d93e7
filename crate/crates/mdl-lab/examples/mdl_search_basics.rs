//! Shortest-interpolator search on a hand-built sample.
//!
//! Builds an eight-point sample labeled by bit 3 with one flipped label,
//! then compares the shortest perfect fit against the penalized search:
//! a light penalty tolerates one mistake for a six-bit rule, a heavy one
//! retreats to a two-bit constant.
//!
//! Run with: cargo run --example mdl_search_basics

use mdl_lab::bitlang::{encode, Instance};
use mdl_lab::learners::{mdl_search, srm_objective, srm_search, train_error};
use mdl_lab::sources::Sample;

fn main() {
    // Instances 0..8 spread over bits 1..=3; the label is bit 3, except
    // that the all-zeros point is flipped to true.
    let pairs: Vec<(Instance, bool)> = (0u64..8)
        .map(|v| {
            let x = Instance(v << 61);
            let y = x.bit(3) ^ (v == 0);
            (x, y)
        })
        .collect();
    let s = Sample::new(pairs).expect("labels are consistent");
    let m = s.len();

    let mdl = mdl_search(&s, 34);
    let found = mdl.found.as_ref().expect("budget 34 is plenty here");
    println!("shortest interpolator ({} bits):", found.code_len);
    println!("  expr: {:?}", found.program);
    println!("  code: {}", encode(&found.program).expect("winner encodes"));
    println!(
        "  train error: {}",
        train_error(&found.program, &s).expect("winner evaluates")
    );

    for lambda in [0.1, 10.0] {
        let srm = srm_search(&s, 34, lambda);
        let f = srm.found.expect("penalized search always returns");
        let obj = srm_objective(f.train_error, f.code_len, m, lambda);
        println!(
            "lambda {lambda:>4}: {:?} ({} bits, train error {:.3}, objective {obj:.4})",
            f.program, f.code_len, f.train_error
        );
    }
}
