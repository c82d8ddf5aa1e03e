//! Sign types of real eigenvalues of J-selfadjoint matrices, sign
//! characteristics, critical points, interval spectral projections,
//! definitizing polynomials and the sign-type correspondence between
//! `T[*]T` and `TT[*]`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krein::{
    gram_inertia, product_pair, selfadjoint_defect, FundamentalSymmetry, Inertia, KreinOperator,
};
use crate::numerics::{
    self, c64, eigenstructure, hermitian_eigen, hermitian_part, kernel_basis, matrix_power, norm2, shift,
    ComplexMatrix, EigenCluster, Eigenstructure, Region, Tolerances,
};
use crate::products::{match_points, FactorPair};
use crate::random::seeded;

/// Relative tolerance for the J-selfadjointness precondition.
pub const SELFADJOINT_TOL: f64 = 1e-9;

/// Largest partial multiplicity handled by [`sign_characteristic`].
pub const MAX_PARTIAL_MULTIPLICITY: usize = 3;

/// Relative tolerance of the eigenvector identity `[Tx, Tx] = lambda [x, x]`.
pub const EIGENVECTOR_IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignType {
    PositiveType,
    NegativeType,
    Critical,
}

impl SignType {
    /// Exchanges positive and negative type.
    pub fn swapped(self) -> Self {
        match self {
            SignType::PositiveType => SignType::NegativeType,
            SignType::NegativeType => SignType::PositiveType,
            SignType::Critical => SignType::Critical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignBlock {
    pub size: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignClassification {
    pub eigenvalue: f64,
    pub sign_type: SignType,
    pub eigenspace_inertia: Inertia,
    pub semisimple: bool,
    pub weyr: Vec<usize>,
    /// Empty when the sign characteristic could not be computed.
    pub sign_characteristic: Vec<SignBlock>,
}

fn require_selfadjoint(a: &ComplexMatrix, j: &FundamentalSymmetry) -> Result<()> {
    let defect = selfadjoint_defect(a, j)?;
    if defect > SELFADJOINT_TOL * (1.0 + norm2(a)) {
        return Err(Error::NotJSelfadjoint { defect });
    }
    Ok(())
}

fn real_value(c: &EigenCluster) -> Complex64 {
    c64(c.value.re, 0.0)
}

fn find_real_cluster(es: &Eigenstructure, lambda: f64) -> Result<&EigenCluster> {
    let not_eig = Error::NotAnEigenvalue { re: lambda, im: 0.0 };
    let radius = 1e3 * es.cluster_tolerance;
    let (i, d) = es.nearest(c64(lambda, 0.0)).ok_or(not_eig.clone())?;
    let c = &es.clusters[i];
    if d > radius || c.value.im.abs() > es.cluster_tolerance {
        return Err(not_eig);
    }
    Ok(c)
}

fn classify_cluster(a: &ComplexMatrix, j: &FundamentalSymmetry, c: &EigenCluster) -> Result<SignClassification> {
    let lambda = real_value(c);
    let v = kernel_basis(a, lambda, 1, c.geometric_mult())?;
    let inertia = gram_inertia(&v, j)?;
    let semisimple = c.is_semisimple();
    let k = inertia.dim();
    let sign_type = if semisimple && inertia == Inertia::new(k, 0, 0) {
        SignType::PositiveType
    } else if semisimple && inertia == Inertia::new(0, 0, k) {
        SignType::NegativeType
    } else {
        SignType::Critical
    };
    Ok(SignClassification {
        eigenvalue: lambda.re,
        sign_type,
        eigenspace_inertia: inertia,
        semisimple,
        weyr: c.weyr.clone(),
        sign_characteristic: cluster_sign_characteristic(a, j, c).unwrap_or_default(),
    })
}

/// Sign type of the real eigenvalue of `a` nearest to `lambda`.
pub fn classify_real_eigenvalue(
    a: &ComplexMatrix,
    j: &FundamentalSymmetry,
    lambda: f64,
    tol: &Tolerances,
) -> Result<SignClassification> {
    require_selfadjoint(a, j)?;
    let es = eigenstructure(a, tol)?;
    classify_cluster(a, j, find_real_cluster(&es, lambda)?)
}

/// Classifications of all real eigenvalue clusters, ascending.
pub fn classify_spectrum(
    a: &ComplexMatrix,
    j: &FundamentalSymmetry,
    tol: &Tolerances,
) -> Result<Vec<SignClassification>> {
    require_selfadjoint(a, j)?;
    let es = eigenstructure(a, tol)?;
    es.real_clusters().map(|c| classify_cluster(a, j, c)).collect()
}

fn cluster_sign_characteristic(
    a: &ComplexMatrix,
    j: &FundamentalSymmetry,
    c: &EigenCluster,
) -> Result<Vec<SignBlock>> {
    let w = &c.weyr;
    if w.len() > MAX_PARTIAL_MULTIPLICITY {
        return Err(Error::MultiplicityTooLarge(w.len()));
    }
    let lambda = real_value(c);
    let n_mat = shift(a, lambda);
    let scale = norm2(a) + lambda.norm();
    let mut blocks = Vec::new();
    for s in 1..=w.len() {
        let count = w[s - 1] - w.get(s).copied().unwrap_or(0);
        if count == 0 {
            continue;
        }
        // On ker N^s the form x -> [N^{s-1} x, x] vanishes on ker N^{s-1}
        // and on the tails of longer chains; its nonzero eigenvalues carry
        // one sign per block of size s.
        let k = kernel_basis(a, lambda, s, c.kernel_dim(s))?;
        let form = hermitian_part(&(k.adjoint() * j.matrix() * matrix_power(&n_mat, s - 1) * &k));
        let (values, _) = hermitian_eigen(&form);
        let mut by_size: Vec<f64> = values;
        by_size.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
        let threshold = 1e-8 * scale.max(1.0).powi(s as i32 - 1);
        for &e in by_size.iter().take(count) {
            if e.abs() <= threshold {
                return Err(Error::DegenerateForm(format!(
                    "form on blocks of size {s} at {} has a vanishing eigenvalue ({e:e})",
                    lambda.re
                )));
            }
            blocks.push(SignBlock {
                size: s,
                sign: if e > 0.0 { 1 } else { -1 },
            });
        }
    }
    Ok(blocks)
}

/// Partial multiplicities of the real eigenvalue `lambda` with their signs.
pub fn sign_characteristic(
    a: &ComplexMatrix,
    j: &FundamentalSymmetry,
    lambda: f64,
    tol: &Tolerances,
) -> Result<Vec<SignBlock>> {
    require_selfadjoint(a, j)?;
    let es = eigenstructure(a, tol)?;
    cluster_sign_characteristic(a, j, find_real_cluster(&es, lambda)?)
}

/// Real eigenvalues of `a` that are not of definite type.
pub fn critical_points(a: &ComplexMatrix, j: &FundamentalSymmetry, tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(classify_spectrum(a, j, tol)?
        .into_iter()
        .filter(|c| c.sign_type == SignType::Critical)
        .map(|c| c.eigenvalue)
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalProjection {
    pub projector: ComplexMatrix,
    pub inertia_on_range: Inertia,
    pub norm: f64,
    /// `|E[*] - E|`, which vanishes in exact arithmetic.
    pub adjoint_defect: f64,
    pub multiplicity: usize,
}

/// Spectral projection of `a` onto the real eigenvalues inside `(lo, hi)`
/// and the inertia of the form on its range.
pub fn interval_spectral_projection(
    a: &ComplexMatrix,
    j: &FundamentalSymmetry,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<IntervalProjection> {
    let es = eigenstructure(a, tol)?;
    interval_projection_with(a, j, &es, lo, hi)
}

/// As [`interval_spectral_projection`] with a precomputed eigenstructure.
pub fn interval_projection_with(
    a: &ComplexMatrix,
    j: &FundamentalSymmetry,
    es: &Eigenstructure,
    lo: f64,
    hi: f64,
) -> Result<IntervalProjection> {
    if a.nrows() != j.dim() {
        return Err(Error::DimensionMismatch(format!("A is {}x{} but J is {}", a.nrows(), a.ncols(), j.dim())));
    }
    let sp = numerics::spectral_projection(a, es, &Region::interval(lo, hi))?;
    let e = sp.projector;
    let adjoint_defect = selfadjoint_defect(&e, j)?;
    let inertia_on_range = if sp.multiplicity == 0 {
        Inertia::new(0, 0, 0)
    } else {
        let range = numerics::svd(&e)?.u.columns(0, sp.multiplicity).into_owned();
        gram_inertia(&range, j)?
    };
    Ok(IntervalProjection {
        norm: norm2(&e),
        projector: e,
        inertia_on_range,
        adjoint_defect,
        multiplicity: sp.multiplicity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefinitizerSource {
    /// Strictly feasible point found by the search.
    Search,
    /// `p(A) = 0` detected at the search degree.
    Annihilator,
    /// Minimal polynomial from the eigenstructure.
    MinimalPolynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitizingPolynomial {
    /// Ascending degree.
    pub coefficients: Vec<f64>,
    pub degree: usize,
    pub certified_min_eig: f64,
    pub source: DefinitizerSource,
}

/// Number of seeded restarts of the definitizer search.
pub const DEFINITIZE_RESTARTS: usize = 32;
const DEFINITIZE_ITERATIONS: usize = 150;

/// `sum c_k A^k` by Horner's rule.
pub fn polynomial_of_matrix(coefficients: &[f64], a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let mut p = ComplexMatrix::zeros(n, n);
    for &c in coefficients.iter().rev() {
        p = &p * a;
        for i in 0..n {
            p[(i, i)] += c64(c, 0.0);
        }
    }
    p
}

fn min_eig_certificate(coefficients: &[f64], a: &ComplexMatrix, j: &FundamentalSymmetry) -> Result<(f64, f64)> {
    let p = polynomial_of_matrix(coefficients, a);
    let x = j.matrix() * &p;
    let pn = norm2(&p);
    let defect = norm2(&(&x - x.adjoint()));
    if defect > SELFADJOINT_TOL * pn.max(1.0) {
        return Err(Error::NotJSelfadjoint { defect });
    }
    let (values, _) = hermitian_eigen(&x);
    Ok((values[0], pn))
}

/// `J p(A)` is positive semidefinite up to `1e-10 max(1, |p(A)|)`.
pub fn is_definitizing(p: &DefinitizingPolynomial, a: &ComplexMatrix, j: &FundamentalSymmetry) -> Result<bool> {
    if p.coefficients.iter().all(|&c| c == 0.0) {
        return Ok(false);
    }
    let (min_eig, pn) = min_eig_certificate(&p.coefficients, a, j)?;
    Ok(min_eig >= -1e-10 * pn.max(1.0))
}

/// Smallest eigenvalue and its gradient for the smoothed minimum of
/// `sum c_k H_k`.
fn soft_min(terms: &[ComplexMatrix], c: &[f64], beta: f64) -> (f64, Vec<f64>) {
    let n = terms[0].nrows();
    let mut m = ComplexMatrix::zeros(n, n);
    for (h, &ck) in terms.iter().zip(c) {
        m += h * c64(ck, 0.0);
    }
    let (values, vectors) = hermitian_eigen(&m);
    let lmin = values[0];
    let weights: Vec<f64> = values.iter().map(|&l| (-beta * (l - lmin)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let grad = terms
        .iter()
        .map(|h| {
            weights
                .iter()
                .enumerate()
                .map(|(i, &w)| {
                    let v = vectors.column(i);
                    w * (v.adjoint() * h * v)[(0, 0)].re
                })
                .sum::<f64>()
                / total
        })
        .collect();
    (lmin, grad)
}

/// Projected ascent of `lambda_min(sum c_k H_k)` over the unit ball.
fn search_strictly_feasible(terms: &[ComplexMatrix], seed: u64) -> Option<Vec<f64>> {
    let d = terms.len();
    let mut rng = seeded(seed);
    for _ in 0..DEFINITIZE_RESTARTS {
        let mut c: Vec<f64> = (0..d).map(|_| crate::random::gaussian(&mut rng)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        c.iter_mut().for_each(|x| *x /= norm);
        let mut best = f64::NEG_INFINITY;
        let mut stall = 0;
        for it in 0..DEFINITIZE_ITERATIONS {
            let beta = 20.0 * 1.04f64.powi(it as i32);
            let (lmin, grad) = soft_min(terms, &c, beta);
            if lmin > 1e-9 {
                return Some(c);
            }
            if lmin > best + 1e-12 {
                best = lmin;
                stall = 0;
            } else {
                stall += 1;
                if stall > 25 {
                    break;
                }
            }
            let eta = 0.5 / (1.0 + it as f64 / 20.0);
            for (ck, gk) in c.iter_mut().zip(&grad) {
                *ck += eta * gk;
            }
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 {
                c.iter_mut().for_each(|x| *x /= norm);
            }
        }
    }
    None
}

/// Real coefficient vector `c` with `sum c_k vec(A^k) / s_k ~ 0`.
fn annihilator(powers: &[ComplexMatrix]) -> Option<Vec<f64>> {
    let n2 = powers[0].len();
    let d = powers.len();
    let k = ComplexMatrix::from_fn(n2, d, |i, col| powers[col][i]);
    let svd = numerics::svd(&k).ok()?;
    if svd.sigma_min() > 1e-11 * svd.sigma_max() {
        return None;
    }
    let v = svd.v.column(d - 1).into_owned();
    let (imax, _) = v.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    let phase = v[imax].conj() / v[imax].norm();
    let aligned: Vec<Complex64> = v.iter().map(|z| z * phase).collect();
    if aligned.iter().map(|z| z.im.abs()).fold(0.0, f64::max) > 1e-6 {
        return None;
    }
    Some(aligned.iter().map(|z| z.re).collect())
}

fn minimal_polynomial(es: &Eigenstructure) -> Vec<f64> {
    let mut coeffs = vec![c64(1.0, 0.0)];
    for c in &es.clusters {
        for _ in 0..c.index() {
            let mut next = vec![c64(0.0, 0.0); coeffs.len() + 1];
            for (i, &x) in coeffs.iter().enumerate() {
                next[i + 1] += x;
                next[i] -= x * c.value;
            }
            coeffs = next;
        }
    }
    coeffs.iter().map(|z| z.re).collect()
}

/// Finds a nonzero real polynomial `p` of lowest found degree with `J p(A)`
/// positive semidefinite. Degrees `0..=max_degree` are searched in order;
/// when none succeeds the minimal polynomial of `a` is returned.
pub fn definitize(
    a: &ComplexMatrix,
    j: &FundamentalSymmetry,
    max_degree: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<DefinitizingPolynomial> {
    require_selfadjoint(a, j)?;
    let n = a.nrows();
    let mut powers = vec![ComplexMatrix::identity(n, n)];
    let mut scales = vec![1.0_f64.max(norm2(&powers[0]))];
    let mut terms: Vec<ComplexMatrix> = vec![hermitian_part(j.matrix())];
    let finish = |coeffs: Vec<f64>, source| -> Result<DefinitizingPolynomial> {
        let (certified_min_eig, _) = min_eig_certificate(&coeffs, a, j)?;
        let degree = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
        Ok(DefinitizingPolynomial {
            coefficients: coeffs[..=degree].to_vec(),
            degree,
            certified_min_eig,
            source,
        })
    };
    for d in 0..=max_degree {
        if d > 0 {
            let next = &powers[d - 1] * a;
            let s = norm2(&next);
            let s = if s > 0.0 { s } else { 1.0 };
            terms.push(hermitian_part(&(j.matrix() * &next)) / c64(s, 0.0));
            scales.push(s);
            powers.push(next);
        }
        let scaled: Vec<ComplexMatrix> = powers.iter().zip(&scales).map(|(p, &s)| p / c64(s, 0.0)).collect();
        let unscale = |c: Vec<f64>| -> Vec<f64> { c.iter().zip(&scales).map(|(x, s)| x / s).collect() };
        if let Some(c) = annihilator(&scaled) {
            let candidate = finish(unscale(c), DefinitizerSource::Annihilator)?;
            if is_definitizing(&candidate, a, j)? {
                return Ok(candidate);
            }
        }
        if let Some(c) = search_strictly_feasible(&terms, seed.wrapping_add(d as u64)) {
            let candidate = finish(unscale(c), DefinitizerSource::Search)?;
            if is_definitizing(&candidate, a, j)? {
                return Ok(candidate);
            }
        }
    }
    let es = eigenstructure(a, tol)?;
    let mut coeffs = minimal_polynomial(&es);
    let size = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c.abs() * norm2(&matrix_power(a, k)).max(1.0))
        .fold(0.0, f64::max);
    coeffs.iter_mut().for_each(|c| *c /= size);
    finish(coeffs, DefinitizerSource::MinimalPolynomial)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchedSignType {
    pub eigenvalue_first: f64,
    pub eigenvalue_second: f64,
    pub type_first: SignType,
    pub type_second: SignType,
    /// Same type for positive eigenvalues, swapped type for negative ones.
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignTypeComparison {
    /// Classifications for `T[*]T`.
    pub first: Vec<SignClassification>,
    /// Classifications for `TT[*]`.
    pub second: Vec<SignClassification>,
    pub matched: Vec<MatchedSignType>,
    pub unmatched_first: Vec<f64>,
    pub unmatched_second: Vec<f64>,
    pub critical_first: Vec<f64>,
    pub critical_second: Vec<f64>,
    pub critical_sets_equal: bool,
    /// Largest `|[Tx,Tx] - lambda [x,x]| / (|Tx|^2 + |lambda| |x|^2)`.
    pub max_identity_residual: f64,
    pub holds: bool,
}

fn nonzero_real_classes(
    m: &ComplexMatrix,
    j: &FundamentalSymmetry,
    es: &Eigenstructure,
    zero: f64,
) -> Result<Vec<SignClassification>> {
    es.real_clusters()
        .filter(|c| c.value.norm() > zero)
        .map(|c| classify_cluster(m, j, c))
        .collect()
}

/// Classifies the nonzero real eigenvalues of both products and checks
/// that types agree on the positive axis, swap on the negative axis and
/// that the critical sets coincide.
pub fn product_signtype_compare(op: &KreinOperator, tol: &Tolerances) -> Result<SignTypeComparison> {
    let (first, second) = product_pair(op)?;
    let j = &op.j;
    let pair = FactorPair::from_operator(op);
    let zero = pair.zero_threshold(tol);
    let es1 = eigenstructure(&first, tol)?;
    let es2 = eigenstructure(&second, tol)?;
    let c1 = nonzero_real_classes(&first, j, &es1, zero)?;
    let c2 = nonzero_real_classes(&second, j, &es2, zero)?;

    let v1: Vec<Complex64> = c1.iter().map(|c| c64(c.eigenvalue, 0.0)).collect();
    let v2: Vec<Complex64> = c2.iter().map(|c| c64(c.eigenvalue, 0.0)).collect();
    let radius = zero.max(es1.cluster_tolerance).max(es2.cluster_tolerance);
    let mut used1 = vec![false; c1.len()];
    let mut used2 = vec![false; c2.len()];
    let mut matched = Vec::new();
    for (i, k) in match_points(&v1, &v2) {
        if (v1[i] - v2[k]).norm() > radius {
            continue;
        }
        used1[i] = true;
        used2[k] = true;
        let (t1, t2) = (c1[i].sign_type, c2[k].sign_type);
        let expected = if c1[i].eigenvalue > 0.0 { t1 } else { t1.swapped() };
        matched.push(MatchedSignType {
            eigenvalue_first: c1[i].eigenvalue,
            eigenvalue_second: c2[k].eigenvalue,
            type_first: t1,
            type_second: t2,
            consistent: t2 == expected,
        });
    }
    let unmatched_first: Vec<f64> = c1.iter().zip(&used1).filter(|(_, &u)| !u).map(|(c, _)| c.eigenvalue).collect();
    let unmatched_second: Vec<f64> = c2.iter().zip(&used2).filter(|(_, &u)| !u).map(|(c, _)| c.eigenvalue).collect();
    let critical = |cs: &[SignClassification]| -> Vec<f64> {
        cs.iter().filter(|c| c.sign_type == SignType::Critical).map(|c| c.eigenvalue).collect()
    };
    let (critical_first, critical_second) = (critical(&c1), critical(&c2));
    let critical_sets_equal = critical_first.len() == critical_second.len()
        && matched
            .iter()
            .all(|m| (m.type_first == SignType::Critical) == (m.type_second == SignType::Critical));

    let mut max_identity_residual: f64 = 0.0;
    for c in es1.clusters.iter().filter(|c| c.value.norm() > zero) {
        let v = kernel_basis(&first, c.value, 1, c.geometric_mult())?;
        for col in 0..v.ncols() {
            let x: DVector<Complex64> = v.column(col).into_owned();
            let tx = &op.t * &x;
            let lhs = (tx.adjoint() * j.matrix() * &tx)[(0, 0)];
            let rhs = c.value * (x.adjoint() * j.matrix() * &x)[(0, 0)];
            let scale = tx.norm_squared() + c.value.norm() * x.norm_squared();
            max_identity_residual = max_identity_residual.max((lhs - rhs).norm() / scale);
        }
    }
    let holds = matched.iter().all(|m| m.consistent)
        && unmatched_first.is_empty()
        && unmatched_second.is_empty()
        && critical_sets_equal
        && max_identity_residual <= EIGENVECTOR_IDENTITY_TOL;
    Ok(SignTypeComparison {
        first: c1,
        second: c2,
        matched,
        unmatched_first,
        unmatched_second,
        critical_first,
        critical_second,
        critical_sets_equal,
        max_identity_residual,
        holds,
    })
}
