//! Seeded random matrices used by the family generators, the estimators
//! with restarts, the examples and the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::krein::FundamentalSymmetry;
use crate::numerics::{c64, ComplexMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Entries with independent standard normal real and imaginary parts,
/// scaled by `1/sqrt(2)`.
pub fn complex_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| c64(s * gaussian(rng), s * gaussian(rng)))
}

pub fn real_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| c64(gaussian(rng), 0.0))
}

pub fn hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = complex_gaussian(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix with the
/// phases of R's diagonal removed.
pub fn unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let qr = complex_gaussian(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U diag(signs) U^H` with a random unitary `U` and a random signature
/// containing at least one `+1` when `n >= 1`.
pub fn fundamental_symmetry(rng: &mut impl Rng, n: usize) -> FundamentalSymmetry {
    let mut signs: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    if n > 0 && signs.iter().all(|&s| s < 0.0) {
        signs[0] = 1.0;
    }
    let u = unitary(rng, n);
    let d = crate::numerics::diag_real(&signs);
    let j = &u * d * u.adjoint();
    FundamentalSymmetry::new(crate::numerics::hermitian_part(&j)).expect("unitary conjugate of a signature")
}

/// `J H` with `H` Hermitian, hence selfadjoint in the `J` inner product.
pub fn j_selfadjoint(rng: &mut impl Rng, j: &FundamentalSymmetry) -> ComplexMatrix {
    j.matrix() * hermitian(rng, j.dim())
}
