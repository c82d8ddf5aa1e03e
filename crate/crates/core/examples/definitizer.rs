//! Real polynomials `p` with `J p(A)` positive semidefinite.
//!
//! Run with `cargo run --example definitizer`.

use kreinlab::krein::FundamentalSymmetry;
use kreinlab::numerics::{diag_real, Tolerances};
use kreinlab::random::{fundamental_symmetry, j_selfadjoint, seeded};
use kreinlab::signtype::{definitize, is_definitizing};

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let a = diag_real(&[2.0, 3.0]);
    let j = FundamentalSymmetry::from_signature(&[1, -1])?;
    let p = definitize(&a, &j, 4, 0, &tol)?;
    println!("diag(2,3), J = diag(1,-1): p = {:?} ({:?})", p.coefficients, p.source);

    let mut rng = seeded(5);
    for seed in 0..5 {
        let j = fundamental_symmetry(&mut rng, 4);
        let a = j_selfadjoint(&mut rng, &j);
        let p = definitize(&a, &j, 4, seed, &tol)?;
        println!(
            "random 4x4: degree {} via {:?}, min eigenvalue of J p(A) {:.2e}, certified {}",
            p.degree,
            p.source,
            p.certified_min_eig,
            is_definitizing(&p, &a, &j)?
        );
    }
    Ok(())
}
