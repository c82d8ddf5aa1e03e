//! The pair `AB` / `BA` for rectangular factors: nonzero spectra, transport
//! of root subspaces, resolvent identities, domination constants, the
//! quantitative resolvent bound and the pole order at zero.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krein::KreinOperator;
use crate::numerics::{
    self, c64, check_finite, eigenstructure, kernel_basis, norm2, resolvent, ComplexMatrix, EigenCluster,
    Tolerances,
};
use crate::random::{complex_gaussian, seeded};

/// Factors `A: X -> Y` (p x q) and `B: Y -> X` (q x p).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl FactorPair {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix) -> Result<Self> {
        check_finite(&a)?;
        check_finite(&b)?;
        if a.ncols() != b.nrows() || a.nrows() != b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{} but B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(FactorPair { a, b })
    }

    /// `A = T`, `B = T[*]`, so that `AB = TT[*]` and `BA = T[*]T`.
    pub fn from_operator(op: &KreinOperator) -> Self {
        FactorPair {
            a: op.t.clone(),
            b: op.adjoint(),
        }
    }

    pub fn ab(&self) -> ComplexMatrix {
        &self.a * &self.b
    }

    pub fn ba(&self) -> ComplexMatrix {
        &self.b * &self.a
    }

    /// `max(1, |A| |B|)`, the scale of both products.
    pub fn scale(&self) -> f64 {
        (norm2(&self.a) * norm2(&self.b)).max(1.0)
    }

    /// Eigenvalues with modulus at most this count as zero.
    pub fn zero_threshold(&self, tol: &Tolerances) -> f64 {
        tol.nonzero * self.scale()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumCompareReport {
    pub nonzero_clusters_ab: Vec<EigenCluster>,
    pub nonzero_clusters_ba: Vec<EigenCluster>,
    /// `(index into ab list, index into ba list)`.
    pub assignment: Vec<(usize, usize)>,
    pub matched: bool,
    pub max_value_discrepancy: f64,
    pub weyr_match: bool,
    pub tolerance: f64,
}

/// Minimum-cost assignment of rows to columns (`rows <= cols`).
pub(crate) fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "hungarian needs rows <= cols");
    let inf = f64::INFINITY;
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; m + 1]);
    let (mut p, mut way) = (vec![0usize; m + 1], vec![0usize; m + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let (mut delta, mut j1) = (inf, 0);
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut ans = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            ans[p[j] - 1] = j - 1;
        }
    }
    ans
}

/// Pairs points of `left` with points of `right` minimizing the total
/// distance: optimal assignment up to 12 points, greedy nearest pairs
/// beyond that. Returns `(left index, right index)` sorted by left index.
pub fn match_points(left: &[Complex64], right: &[Complex64]) -> Vec<(usize, usize)> {
    let (n, m) = (left.len(), right.len());
    if n == 0 || m == 0 {
        return Vec::new();
    }
    let dist = |i: usize, j: usize| (left[i] - right[j]).norm();
    let mut pairs: Vec<(usize, usize)> = if n.max(m) <= 12 {
        if n <= m {
            let cost: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|j| dist(i, j)).collect()).collect();
            hungarian(&cost).into_iter().enumerate().collect()
        } else {
            let cost: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| dist(i, j)).collect()).collect();
            hungarian(&cost).into_iter().enumerate().map(|(j, i)| (i, j)).collect()
        }
    } else {
        let mut candidates: Vec<(f64, usize, usize)> =
            (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| (dist(i, j), i, j)).collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut used_l, mut used_r) = (vec![false; n], vec![false; m]);
        let mut out = Vec::new();
        for (_, i, j) in candidates {
            if !used_l[i] && !used_r[j] {
                used_l[i] = true;
                used_r[j] = true;
                out.push((i, j));
            }
        }
        out
    };
    pairs.sort();
    pairs
}

/// Compares the nonzero eigenvalue clusters of `AB` and `BA`, including
/// their Weyr characteristics.
pub fn compare_nonzero_spectra(pair: &FactorPair, tol: &Tolerances) -> Result<SpectrumCompareReport> {
    let thr = pair.zero_threshold(tol);
    let nonzero = |es: numerics::Eigenstructure| -> Vec<EigenCluster> {
        es.clusters.into_iter().filter(|c| c.value.norm() > thr).collect()
    };
    let ab = nonzero(eigenstructure(&pair.ab(), tol)?);
    let ba = nonzero(eigenstructure(&pair.ba(), tol)?);
    let va: Vec<Complex64> = ab.iter().map(|c| c.value).collect();
    let vb: Vec<Complex64> = ba.iter().map(|c| c.value).collect();
    let assignment = match_points(&va, &vb);
    let max_value_discrepancy = assignment.iter().map(|&(i, j)| (va[i] - vb[j]).norm()).fold(0.0, f64::max);
    let weyr_match = assignment.iter().all(|&(i, j)| ab[i].weyr == ba[j].weyr);
    let matched = ab.len() == ba.len() && max_value_discrepancy <= thr && weyr_match;
    Ok(SpectrumCompareReport {
        nonzero_clusters_ab: ab,
        nonzero_clusters_ba: ba,
        assignment,
        matched,
        max_value_discrepancy,
        weyr_match,
        tolerance: thr,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transport {
    pub eigenvalue_ba: Complex64,
    pub eigenvalue_ab: Complex64,
    pub power: usize,
    pub dim_ba: usize,
    pub dim_ab: usize,
    /// `A` restricted to `ker (BA - lambda)^n`, in orthonormal bases.
    pub forward: ComplexMatrix,
    /// Inverse of `forward`; equals `lambda^{-1} B` restricted when `n = 1`.
    pub inverse: ComplexMatrix,
    /// Sine of the largest principal angle between `A V` and `W`.
    pub max_angle_sine: f64,
    /// `|lambda^{-1} B A V - V|` for `n = 1`.
    pub round_trip_residual: Option<f64>,
}

/// Largest principal-angle tolerance between `A ker(BA - lambda)^n` and
/// `ker(AB - lambda)^n`.
pub const TRANSPORT_ANGLE_TOL: f64 = 1e-7;

fn locate_cluster<'a>(
    es: &'a numerics::Eigenstructure,
    z: Complex64,
    radius: f64,
) -> Option<&'a EigenCluster> {
    es.nearest(z).filter(|&(_, d)| d <= radius).map(|(i, _)| &es.clusters[i])
}

/// Transports `ker (BA - lambda)^n` onto `ker (AB - lambda)^n` through `A`.
pub fn eigenspace_transport(pair: &FactorPair, lambda: Complex64, n: usize, tol: &Tolerances) -> Result<Transport> {
    let thr = pair.zero_threshold(tol);
    let not_eig = Error::NotAnEigenvalue {
        re: lambda.re,
        im: lambda.im,
    };
    if n == 0 {
        return Err(Error::validation("n", "power must be at least 1"));
    }
    if lambda.norm() <= thr {
        return Err(not_eig);
    }
    let (ab, ba) = (pair.ab(), pair.ba());
    let es_ba = eigenstructure(&ba, tol)?;
    let es_ab = eigenstructure(&ab, tol)?;
    let radius = thr.max(es_ba.cluster_tolerance).max(es_ab.cluster_tolerance);
    let c_ba = locate_cluster(&es_ba, lambda, radius).ok_or(not_eig)?;
    let c_ab = locate_cluster(&es_ab, c_ba.value, radius)
        .ok_or_else(|| Error::TransportFailure("eigenvalue of BA is missing from AB".into()))?;
    let (dim_ba, dim_ab) = (c_ba.kernel_dim(n), c_ab.kernel_dim(n));
    if dim_ba != dim_ab {
        return Err(Error::TransportFailure(format!(
            "kernel dimensions differ: {dim_ba} for BA, {dim_ab} for AB"
        )));
    }
    let v = kernel_basis(&ba, c_ba.value, n, dim_ba)?;
    let w = kernel_basis(&ab, c_ab.value, n, dim_ab)?;
    let av = &pair.a * &v;
    let q = numerics::orthonormal_range(&av, 1e-10)?;
    if q.ncols() != dim_ba {
        return Err(Error::TransportFailure("A is not injective on the root subspace".into()));
    }
    let p = ComplexMatrix::identity(w.nrows(), w.nrows()) - &w * w.adjoint();
    let max_angle_sine = norm2(&(p * &q));
    if max_angle_sine > TRANSPORT_ANGLE_TOL {
        return Err(Error::TransportFailure(format!(
            "A maps the BA root subspace off the AB root subspace (sin angle {max_angle_sine:e})"
        )));
    }
    let forward = w.adjoint() * &av;
    let (inverse, round_trip_residual) = if n == 1 {
        let scaled_b = pair.b.unscale(1.0).map(|z| z / c_ba.value);
        let inverse = v.adjoint() * &scaled_b * &w;
        let residual = norm2(&(&scaled_b * &av - &v));
        (inverse, Some(residual))
    } else {
        let inverse = forward
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::TransportFailure("restricted map is singular".into()))?;
        (inverse, None)
    };
    Ok(Transport {
        eigenvalue_ba: c_ba.value,
        eigenvalue_ab: c_ab.value,
        power: n,
        dim_ba,
        dim_ab,
        forward,
        inverse,
        max_angle_sine,
        round_trip_residual,
    })
}

fn require_nonzero(lambda: Complex64) -> Result<()> {
    if lambda.norm() == 0.0 {
        return Err(Error::validation("lambda", "must be nonzero"));
    }
    Ok(())
}

/// `lambda^{-1} [B (AB - lambda)^{-1} A - I]`, the resolvent of `BA`
/// expressed through the resolvent of `AB`.
pub fn resolvent_via_ab(pair: &FactorPair, lambda: Complex64, guard: f64) -> Result<ComplexMatrix> {
    require_nonzero(lambda)?;
    let q = pair.b.nrows();
    let r_ab = resolvent(&pair.ab(), lambda, guard)?;
    Ok((&pair.b * r_ab * &pair.a - ComplexMatrix::identity(q, q)) / lambda)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `|(BA - l)^{-1} - l^{-1}[B (AB - l)^{-1} A - I]|`.
    pub residual_ppp: f64,
    /// `|(BA - l)^{-1} - l^{-1}(m + (l - m) B (AB - l)^{-1} A)(BA - m)^{-1}|`.
    pub residual_two_param: f64,
    /// `|(BA - l)^{-1}|`, the natural scale of both residuals.
    pub resolvent_norm: f64,
}

pub fn resolvent_identity_residuals(
    pair: &FactorPair,
    lambda: Complex64,
    mu: Complex64,
    guard: f64,
) -> Result<IdentityResiduals> {
    require_nonzero(lambda)?;
    let (ab, ba) = (pair.ab(), pair.ba());
    let q = ba.nrows();
    let r_ba = resolvent(&ba, lambda, guard)?;
    let r_ab = resolvent(&ab, lambda, guard)?;
    let r_ba_mu = resolvent(&ba, mu, guard)?;
    let sandwich = &pair.b * r_ab * &pair.a;
    let id = ComplexMatrix::identity(q, q);
    let ppp = (&sandwich - &id) / lambda;
    let two = (id * mu + sandwich * (lambda - mu)) * r_ba_mu / lambda;
    Ok(IdentityResiduals {
        residual_ppp: norm2(&(&r_ba - ppp)),
        residual_two_param: norm2(&(&r_ba - two)),
        resolvent_norm: norm2(&r_ba),
    })
}

/// Estimates of the domination constants with witness vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominationConstants {
    /// Best found `sup |Bx| / (|ABx| + |x|)`.
    pub c1: f64,
    /// Best found `sup |Ax| / (|BAx| + |x|)`.
    pub c2: f64,
    /// `max(1, c1 c2)`.
    pub constant: f64,
    pub witness_c1: Vec<Complex64>,
    pub witness_c2: Vec<Complex64>,
}

/// Number of random starts for the domination ascent.
pub const DOMINATION_STARTS: usize = 64;

/// `|f x| / (|g x| + |x|)`.
pub fn domination_ratio(f: &ComplexMatrix, g: &ComplexMatrix, x: &DVector<Complex64>) -> f64 {
    let nx = x.norm();
    if nx == 0.0 {
        return 0.0;
    }
    (f * x).norm() / ((g * x).norm() + nx)
}

fn ascend_ratio(f: &ComplexMatrix, g: &ComplexMatrix, start: DVector<Complex64>) -> (f64, DVector<Complex64>) {
    let ff = f.adjoint() * f;
    let gg = g.adjoint() * g;
    let normalize = |v: DVector<Complex64>| {
        let n = v.norm();
        v / c64(n, 0.0)
    };
    let mut x = normalize(start);
    let mut value = domination_ratio(f, g, &x);
    let mut step = 1.0;
    for _ in 0..2000 {
        let fx = (f * &x).norm();
        let gx = (g * &x).norm();
        let den = gx + 1.0;
        let grad_num = if fx > 0.0 { &ff * &x / c64(fx, 0.0) } else { DVector::zeros(x.len()) };
        let mut grad_den = x.clone();
        if gx > 0.0 {
            grad_den += &gg * &x / c64(gx, 0.0);
        }
        let grad = (grad_num * c64(den, 0.0) - grad_den * c64(fx, 0.0)) / c64(den * den, 0.0);
        if grad.norm() <= 1e-15 {
            break;
        }
        let mut accepted = None;
        while step > 1e-14 {
            let y = normalize(&x + &grad * c64(step, 0.0));
            let vy = domination_ratio(f, g, &y);
            if vy > value {
                accepted = Some((y, vy));
                step = (step * 2.0).min(1e6);
                break;
            }
            step *= 0.5;
        }
        let Some((y, vy)) = accepted else { break };
        let moved = (&y - &x).norm();
        let gain = vy - value;
        x = y;
        value = vy;
        if moved < 1e-10 || gain <= 1e-15 * value {
            break;
        }
    }
    (value, x)
}

fn maximize_ratio(f: &ComplexMatrix, g: &ComplexMatrix, seed: u64) -> (f64, DVector<Complex64>) {
    let dim = f.ncols();
    let mut rng = seeded(seed);
    let mut starts: Vec<DVector<Complex64>> = Vec::with_capacity(DOMINATION_STARTS + 1);
    if let Ok(d) = numerics::svd(f) {
        starts.push(d.v.column(0).into_owned());
    }
    for _ in 0..DOMINATION_STARTS {
        starts.push(complex_gaussian(&mut rng, dim, 1).column(0).into_owned());
    }
    let mut best = (0.0, DVector::from_element(dim, c64(0.0, 0.0)));
    best.1[0] = c64(1.0, 0.0);
    for s in starts {
        if s.norm() == 0.0 {
            continue;
        }
        let (v, x) = ascend_ratio(f, g, s);
        if v > best.0 {
            best = (v, x);
        }
    }
    best
}

/// Multistart ascent for the domination constants of `B` by `AB` and of
/// `A` by `BA`. Reported values are attained by the recorded witnesses.
pub fn domination_constants(pair: &FactorPair, seed: u64) -> DominationConstants {
    let (c1, w1) = maximize_ratio(&pair.b, &pair.ab(), seed);
    let (c2, w2) = maximize_ratio(&pair.a, &pair.ba(), seed.wrapping_add(1));
    DominationConstants {
        c1,
        c2,
        constant: (c1 * c2).max(1.0),
        witness_c1: w1.iter().copied().collect(),
        witness_c2: w2.iter().copied().collect(),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub m1: f64,
    pub m2: f64,
    pub constant: f64,
}

/// Checks `|(BA - l)^{-1}| <= C M1(l) M2(m) / |l| (|m| + |l - m| (2 + |l|)(2 + |m|))`
/// with `M1(l) = max(1, |(AB - l)^{-1}|)` and `M2(m) = max(1, |(BA - m)^{-1}|)`.
pub fn resolvent_bound_check(
    pair: &FactorPair,
    lambda: Complex64,
    mu: Complex64,
    dom: &DominationConstants,
    guard: f64,
) -> Result<BoundCheck> {
    require_nonzero(lambda)?;
    let (ab, ba) = (pair.ab(), pair.ba());
    let lhs = numerics::resolvent_norm(&ba, lambda, guard)?;
    let m1 = numerics::resolvent_norm(&ab, lambda, guard)?.max(1.0);
    let m2 = numerics::resolvent_norm(&ba, mu, guard)?.max(1.0);
    let (l, m) = (lambda.norm(), mu.norm());
    let rhs = dom.constant * m1 * m2 / l * (m + (lambda - mu).norm() * (2.0 + l) * (2.0 + m));
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
        m1,
        m2,
        constant: dom.constant,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PoleOrder {
    /// Length of the Weyr characteristic of `BA` at zero (0 if `0` is not
    /// an eigenvalue).
    pub order_ba: usize,
    pub zero_multiplicity_ba: usize,
    pub ab_invertible: bool,
    /// `0` is in the resolvent set of `AB` and in the spectrum of `BA`.
    pub corollary_applies: bool,
}

impl PoleOrder {
    /// When AB is invertible and 0 is in the spectrum of BA, the pole must be simple.
    pub fn consistent(&self) -> bool {
        !self.corollary_applies || self.order_ba == 1
    }
}

pub fn zero_pole_order(pair: &FactorPair, tol: &Tolerances) -> Result<PoleOrder> {
    let thr = pair.zero_threshold(tol);
    let ab_zero = numerics::eigenvalues(&pair.ab())?.iter().filter(|z| z.norm() <= thr).count();
    let ba = pair.ba();
    let zero_multiplicity_ba = numerics::eigenvalues(&ba)?.iter().filter(|z| z.norm() <= thr).count();
    let order_ba = numerics::weyr_characteristic(&ba, c64(0.0, 0.0), zero_multiplicity_ba, tol.rank)?.len();
    let ab_invertible = ab_zero == 0;
    Ok(PoleOrder {
        order_ba,
        zero_multiplicity_ba,
        ab_invertible,
        corollary_applies: ab_invertible && zero_multiplicity_ba > 0,
    })
}
