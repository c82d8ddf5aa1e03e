//! Nonzero spectra of `AB` and `BA` for rectangular factors.
//!
//! Run with `cargo run --example ab_ba_spectra`.

use kreinlab::numerics::Tolerances;
use kreinlab::products::{compare_nonzero_spectra, FactorPair};
use kreinlab::random::{complex_gaussian, seeded};

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let mut rng = seeded(42);
    let pair = FactorPair::new(complex_gaussian(&mut rng, 3, 5), complex_gaussian(&mut rng, 5, 3))?;
    let report = compare_nonzero_spectra(&pair, &tol)?;

    println!("AB is 3x3, BA is 5x5");
    for &(i, k) in &report.assignment {
        let (ab, ba) = (&report.nonzero_clusters_ab[i], &report.nonzero_clusters_ba[k]);
        println!("  AB {:>24.6}   BA {:>24.6}   weyr {:?}", ab.value, ba.value, ba.weyr);
    }
    println!(
        "matched: {}  max discrepancy: {:.2e}  zero threshold: {:.1e}",
        report.matched, report.max_value_discrepancy, report.tolerance
    );
    Ok(())
}
