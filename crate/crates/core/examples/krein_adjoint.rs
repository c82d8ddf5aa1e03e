//! Krein adjoints, selfadjointness and Gram inertia.
//!
//! Run with `cargo run --example krein_adjoint`.

use kreinlab::krein::{self, FundamentalSymmetry, KreinOperator};
use kreinlab::numerics::from_real;

fn main() -> kreinlab::Result<()> {
    let flip = FundamentalSymmetry::flip_blocks(1)?;
    let sig = FundamentalSymmetry::from_signature(&[1, -1])?;

    let t = from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    println!("T        = {t}");
    println!("T[*] (J0) = {}", krein::krein_adjoint(&t, &flip)?);

    let nilpotent = from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    println!(
        "[[0,1],[0,0]] is J0-selfadjoint: {}",
        krein::is_j_selfadjoint(&nilpotent, &flip, 1e-12)?
    );

    let e1 = from_real(2, 1, &[1.0, 0.0]);
    println!("inertia of span(e1) under J0:         {:?}", krein::gram_inertia(&e1, &flip)?);
    println!("inertia of span(e1) under diag(1,-1): {:?}", krein::gram_inertia(&e1, &sig)?);

    let op = KreinOperator::new(from_real(2, 2, &[0.0, 2.0, 1.0, 0.0]), sig)?;
    let (first, second) = krein::product_pair(&op)?;
    println!("T[*]T = {first}TT[*] = {second}");
    Ok(())
}
