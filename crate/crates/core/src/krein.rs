//! Krein-space primitives: fundamental symmetries, Krein adjoints,
//! selfadjointness tests, Gram inertia and the product pair
//! `(T[*]T, TT[*])`.
//!
//! The indefinite inner product is `[x, y] = <J x, y> = y^H J x`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, c64, check_finite, norm2, require_square, ComplexMatrix};

/// Tolerance for the Hermitian and involution checks on `J`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Tolerance used when verifying that computed products are J-selfadjoint.
pub const PRODUCT_SELFADJOINT_TOL: f64 = 1e-10;
/// Relative zero threshold for Gram eigenvalues.
pub const INERTIA_ZERO_TOL: f64 = 1e-9;

/// A Hermitian involution `J` defining the indefinite inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSymmetry {
    matrix: ComplexMatrix,
}

impl FundamentalSymmetry {
    /// Validates `J = J^H` and `J^2 = I`. Non-Hermitian input is rejected,
    /// never symmetrized.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = require_square(&matrix).map_err(|_| Error::InvalidSymmetry("J must be square".into()))?;
        check_finite(&matrix)?;
        let scale = norm2(&matrix);
        let herm = norm2(&(&matrix - matrix.adjoint()));
        if herm > SYMMETRY_TOL * scale.max(1.0) {
            return Err(Error::InvalidSymmetry(format!("J is not Hermitian (defect {herm:e})")));
        }
        let inv = norm2(&(&matrix * &matrix - ComplexMatrix::identity(n, n)));
        if inv > SYMMETRY_TOL {
            return Err(Error::InvalidSymmetry(format!("J^2 != I (defect {inv:e})")));
        }
        Ok(FundamentalSymmetry { matrix })
    }

    pub fn identity(n: usize) -> Self {
        FundamentalSymmetry {
            matrix: ComplexMatrix::identity(n, n),
        }
    }

    /// Diagonal `J` from a list of `+1` / `-1` entries.
    pub fn from_signature(signs: &[i32]) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidSymmetry("empty signature".into()));
        }
        if let Some(bad) = signs.iter().find(|s| s.abs() != 1) {
            return Err(Error::InvalidSymmetry(format!("signature entry {bad} is not +1 or -1")));
        }
        let values: Vec<f64> = signs.iter().map(|&s| s as f64).collect();
        Ok(FundamentalSymmetry {
            matrix: numerics::diag_real(&values),
        })
    }

    /// Direct sum of `count` copies of `[[0, 1], [1, 0]]`.
    pub fn flip_blocks(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidSymmetry("flip_blocks must be at least 1".into()));
        }
        let n = 2 * count;
        let matrix = ComplexMatrix::from_fn(n, n, |i, j| {
            if i / 2 == j / 2 && i != j {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        Ok(FundamentalSymmetry { matrix })
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(parts: &[FundamentalSymmetry]) -> Self {
        let blocks: Vec<ComplexMatrix> = parts.iter().map(|p| p.matrix.clone()).collect();
        FundamentalSymmetry {
            matrix: block_diagonal(&blocks),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `[x, y] = y^H J x`.
    pub fn form(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
        (y.adjoint() * &self.matrix * x)[(0, 0)]
    }
}

/// Block-diagonal assembly of square blocks.
pub fn block_diagonal(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// An operator `T` on the Krein space defined by `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinOperator {
    pub t: ComplexMatrix,
    pub j: FundamentalSymmetry,
}

impl KreinOperator {
    pub fn new(t: ComplexMatrix, j: FundamentalSymmetry) -> Result<Self> {
        let n = require_square(&t)?;
        check_finite(&t)?;
        if n != j.dim() {
            return Err(Error::DimensionMismatch(format!("T is {n}x{n} but J is {0}x{0}", j.dim())));
        }
        Ok(KreinOperator { t, j })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        adjoint_unchecked(&self.t, &self.j)
    }
}

/// Counts of positive, zero and negative eigenvalues of a Hermitian form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
}

impl Inertia {
    pub fn new(n_plus: usize, n_zero: usize, n_minus: usize) -> Self {
        Inertia { n_plus, n_zero, n_minus }
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_zero + self.n_minus
    }

    pub fn is_positive_definite(&self) -> bool {
        self.dim() > 0 && self.n_plus == self.dim()
    }

    pub fn is_negative_definite(&self) -> bool {
        self.dim() > 0 && self.n_minus == self.dim()
    }
}

fn adjoint_unchecked(t: &ComplexMatrix, j: &FundamentalSymmetry) -> ComplexMatrix {
    j.matrix() * t.adjoint() * j.matrix()
}

fn check_dims(a: &ComplexMatrix, j: &FundamentalSymmetry) -> Result<()> {
    if a.nrows() != j.dim() || a.ncols() != j.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but J is {2}x{2}",
            a.nrows(),
            a.ncols(),
            j.dim()
        )));
    }
    Ok(())
}

/// Krein adjoint `T[*] = J T^H J`.
pub fn krein_adjoint(t: &ComplexMatrix, j: &FundamentalSymmetry) -> Result<ComplexMatrix> {
    check_dims(t, j)?;
    Ok(adjoint_unchecked(t, j))
}

/// `|J A - (J A)^H|`, the absolute J-selfadjointness defect.
pub fn selfadjoint_defect(a: &ComplexMatrix, j: &FundamentalSymmetry) -> Result<f64> {
    check_dims(a, j)?;
    let ja = j.matrix() * a;
    Ok(norm2(&(&ja - ja.adjoint())))
}

/// True iff `|J A - (J A)^H| <= tol (1 + |A|)`.
pub fn is_j_selfadjoint(a: &ComplexMatrix, j: &FundamentalSymmetry, tol: f64) -> Result<bool> {
    let defect = selfadjoint_defect(a, j)?;
    Ok(defect <= tol * (1.0 + norm2(a)))
}

/// Inertia of a Hermitian matrix; eigenvalues with modulus at most
/// `zero_tol` count as zero.
pub fn hermitian_inertia(h: &ComplexMatrix, zero_tol: f64) -> Inertia {
    let mut inertia = Inertia::default();
    for ev in numerics::hermitian_eigenvalues(h) {
        if ev.abs() <= zero_tol {
            inertia.n_zero += 1;
        } else if ev > 0.0 {
            inertia.n_plus += 1;
        } else {
            inertia.n_minus += 1;
        }
    }
    inertia
}

/// Inertia of the Gram matrix `V^H J V` of the columns of `V`.
///
/// The zero threshold is `1e-9 * max(|Gram|, sigma_max(V)^2)`; the second
/// term keeps an exactly neutral vector neutral when the Gram matrix
/// itself is pure roundoff.
pub fn gram_inertia(v: &ComplexMatrix, j: &FundamentalSymmetry) -> Result<Inertia> {
    if v.nrows() != j.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} rows but J is {1}x{1}",
            v.nrows(),
            j.dim()
        )));
    }
    if v.ncols() == 0 {
        return Ok(Inertia::default());
    }
    let s = numerics::singular_values(v)?;
    let (smax, smin) = (s[0], *s.last().unwrap());
    if v.ncols() > v.nrows() || smin <= INERTIA_ZERO_TOL * smax || smax == 0.0 {
        return Err(Error::RankDeficientBasis { sigma_min: smin });
    }
    let gram = numerics::hermitian_part(&(v.adjoint() * j.matrix() * v));
    let zero_tol = INERTIA_ZERO_TOL * norm2(&gram).max(smax * smax);
    Ok(hermitian_inertia(&gram, zero_tol))
}

/// `(T[*]T, TT[*])`, each verified J-selfadjoint.
pub fn product_pair(op: &KreinOperator) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let adj = op.adjoint();
    let first = &adj * &op.t;
    let second = &op.t * &adj;
    for p in [&first, &second] {
        if !is_j_selfadjoint(p, &op.j, PRODUCT_SELFADJOINT_TOL)? {
            return Err(Error::SelfadjointnessViolation {
                defect: selfadjoint_defect(p, &op.j)?,
            });
        }
    }
    Ok((first, second))
}
