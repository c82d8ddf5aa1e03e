//! Sign types of real eigenvalues and their swap between `T[*]T` and
//! `TT[*]` on the negative axis.
//!
//! Run with `cargo run --example sign_types`.

use kreinlab::krein::{FundamentalSymmetry, KreinOperator};
use kreinlab::numerics::{from_real, Tolerances};
use kreinlab::signtype::{product_signtype_compare, sign_characteristic};

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let op = KreinOperator::new(from_real(2, 2, &[0.0, 2.0, 1.0, 0.0]), FundamentalSymmetry::from_signature(&[1, -1])?)?;
    let r = product_signtype_compare(&op, &tol)?;
    println!("{:>6}  {:>14}  {:>14}", "l", "T[*]T", "TT[*]");
    for m in &r.matched {
        println!("{:>6.2}  {:>14?}  {:>14?}", m.eigenvalue_first, m.type_first, m.type_second);
    }
    println!("correspondence holds: {}", r.holds);

    let jordan = from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let flip = FundamentalSymmetry::flip_blocks(1)?;
    println!("sign characteristic of [[1,1],[0,1]] under J0 at 1: {:?}", sign_characteristic(&jordan, &flip, 1.0, &tol)?);
    Ok(())
}
