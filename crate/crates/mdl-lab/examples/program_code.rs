//! The prefix-free program code: encode, decode, enumerate.
//!
//! Every program is a self-delimiting bit string, so code length is a
//! complexity measure and programs can be enumerated in length order.
//! The demo round-trips a few programs through the code and its hex
//! serialization, then counts programs per length.
//!
//! Run with: cargo run --example program_code

use mdl_lab::bitlang::{code_len, decode, encode, enumerate, Expr, Instance};

fn main() {
    let programs = [
        Expr::Zero,
        Expr::Bit(1),
        Expr::Not(Box::new(Expr::Bit(2))),
        Expr::Xor(Box::new(Expr::Bit(1)), Box::new(Expr::Bit(3))),
        Expr::If(
            Box::new(Expr::Bit(1)),
            Box::new(Expr::Bit(2)),
            Box::new(Expr::One),
        ),
    ];
    for e in &programs {
        let code = encode(e).expect("encodable");
        assert_eq!(decode(&code).expect("decodable"), *e);
        let hex = code.to_string();
        assert_eq!(Expr::from_code_str(&hex).expect("parsable"), *e);
        println!("{:>2} bits  {hex:<12} {e:?}", code_len(e).expect("sized"));
    }

    // x = 1010... reading bits 1..=4: true, false, true, false.
    let x = Instance(0xAAAA_AAAA_AAAA_AAAA);
    let rule = &programs[3];
    println!(
        "\n{rule:?} on x = {:#x}: {}",
        x.0,
        rule.eval(x).expect("in range")
    );

    println!("\nprograms per code length:");
    for len in 2..=12 {
        println!("{len:>3}: {}", enumerate(len).len());
    }
}
