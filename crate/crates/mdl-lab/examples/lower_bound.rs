//! A two-point sample no very short program separates.
//!
//! Short prefix-free codes describe few programs, and few programs can
//! only realize few labelings. The demo scans instances until it finds a
//! pair that every program under the length budget labels identically,
//! then confirms by search that fitting (x1 -> 0, x2 -> 1) forces a
//! longer program.
//!
//! Run with: cargo run --example lower_bound

use mdl_lab::experiments::lower_bound_demo;

fn main() {
    let (b, budget) = (8, 3);
    let report = lower_bound_demo(b, budget).expect("a colliding pair exists");

    println!(
        "searched {}-bit instances against all programs under {} bits",
        report.b, report.len_budget
    );
    println!(
        "colliding pair: x1 = {:#018x}, x2 = {:#018x}",
        report.x1.0, report.x2.0
    );
    println!(
        "programs checked during verification: {}",
        report.programs_checked
    );
    println!("pair verified: {}", report.verified);
    match report.mdl_len {
        Some(len) => println!(
            "shortest program separating the pair: {len} bits (> budget {})",
            report.len_budget
        ),
        None => println!("no separating program found within the search budget"),
    }
}
