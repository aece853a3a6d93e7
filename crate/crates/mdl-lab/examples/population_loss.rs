//! Population error of a fixed program, exactly and by sampling.
//!
//! When a program and the source's label rule depend on few enough bits,
//! the population error is a finite weighted sum and is computed exactly;
//! otherwise it is estimated on fresh draws from a dedicated test stream.
//! The demo evaluates a few predictors against a noisy source both ways.
//!
//! Run with: cargo run --example population_loss

use mdl_lab::bitlang::{Expr, HashExpr};
use mdl_lab::learners::population_loss;
use mdl_lab::BitVec;
use mdl_lab::sources::{bayes_error, SourceModel, SourceSpec};

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
    println!("noisy source around Bit(1), bayes error {}", bayes_error(&spec));

    let predictors = [
        ("the true rule", Expr::Bit(1)),
        ("its negation", Expr::Not(Box::new(Expr::Bit(1)))),
        ("an irrelevant bit", Expr::Bit(2)),
        // Reads a 30-bit prefix, past the exact-enumeration footprint.
        (
            "a wide-prefix hash",
            Expr::Hash(HashExpr {
                m: 4,
                k: 1,
                b: 30,
                seed: BitVec::new(),
            }),
        ),
    ];
    for (label, h) in &predictors {
        let loss = population_loss(h, &spec, 200_000).expect("evaluates");
        match loss.std_err {
            0.0 => println!("{label:<24} {:.6}  ({})", loss.value, loss.mode),
            se => println!(
                "{label:<24} {:.6}  ({}, n = {}, se {:.6})",
                loss.value, loss.mode, loss.n_eval, se
            ),
        }
    }
}
