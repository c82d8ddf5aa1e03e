//! `A` maps `ker (BA - l)^n` onto `ker (AB - l)^n`, and `l^{-1} B` inverts it.
//!
//! Run with `cargo run --example eigenspace_transport`.

use kreinlab::numerics::{c64, diag_real, ComplexMatrix, Tolerances};
use kreinlab::products::{eigenspace_transport, FactorPair};
use kreinlab::random::{complex_gaussian, seeded};

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let mut rng = seeded(8);
    let shift = ComplexMatrix::identity(4, 4).scale(2.0);
    let s = complex_gaussian(&mut rng, 4, 4) + &shift;
    let ba = &s * diag_real(&[2.0, 2.0, -1.0, 0.5]) * s.clone().try_inverse().expect("invertible");
    let a = complex_gaussian(&mut rng, 4, 4) + &shift;
    let b = &ba * a.clone().try_inverse().expect("invertible");
    let pair = FactorPair::new(a, b)?;

    let t = eigenspace_transport(&pair, c64(2.0, 0.0), 1, &tol)?;
    println!("dim ker(BA - 2) = {}, dim ker(AB - 2) = {}", t.dim_ba, t.dim_ab);
    println!("forward map in orthonormal bases:{}", t.forward);
    println!("largest principal angle sine: {:.2e}", t.max_angle_sine);
    println!("round trip residual: {:.2e}", t.round_trip_residual.unwrap_or(f64::NAN));
    Ok(())
}
