//! Riesz projections, interval projections and the inertia of the form on
//! their ranges.
//!
//! Run with `cargo run --example spectral_projection`.

use kreinlab::numerics::{eigenstructure, riesz_projection, Region, Tolerances};
use kreinlab::random::{fundamental_symmetry, j_selfadjoint, seeded};
use kreinlab::signtype::{classify_spectrum, interval_spectral_projection};

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let mut rng = seeded(21);
    let j = fundamental_symmetry(&mut rng, 5);
    let a = j_selfadjoint(&mut rng, &j);

    for c in eigenstructure(&a, &tol)?.clusters {
        println!("eigenvalue {:>22.5}  weyr {:?}", c.value, c.weyr);
    }
    for c in classify_spectrum(&a, &j, &tol)? {
        println!("real {:+.5}: {:?}, inertia {:?}", c.eigenvalue, c.sign_type, c.eigenspace_inertia);
    }
    let all = riesz_projection(&a, &Region::disk(Default::default(), 100.0), &tol)?;
    println!("projection onto the whole spectrum has trace {:.6}", all.trace());

    let e = interval_spectral_projection(&a, &j, -10.0, 10.0, &tol)?;
    println!(
        "E(-10, 10): multiplicity {}, norm {:.4}, inertia {:?}, J-adjoint defect {:.1e}",
        e.multiplicity, e.norm, e.inertia_on_range, e.adjoint_defect
    );
    Ok(())
}
