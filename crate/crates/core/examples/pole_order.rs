//! Order of the pole of `(BA - l)^{-1}` at zero.
//!
//! Run with `cargo run --example pole_order`.

use kreinlab::numerics::{from_real, Tolerances};
use kreinlab::products::{zero_pole_order, FactorPair};
use kreinlab::random::{complex_gaussian, seeded};

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let mut rng = seeded(3);
    let wide = FactorPair::new(complex_gaussian(&mut rng, 2, 5), complex_gaussian(&mut rng, 5, 2))?;
    let r = zero_pole_order(&wide, &tol)?;
    println!("2x5 / 5x2: AB invertible {}, zero multiplicity of BA {}, pole order {}", r.ab_invertible, r.zero_multiplicity_ba, r.order_ba);

    let shift = FactorPair::new(from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]), from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]))?;
    let r = zero_pole_order(&shift, &tol)?;
    println!("AB = 0, BA nilpotent: AB invertible {}, pole order {}", r.ab_invertible, r.order_ba);
    Ok(())
}
