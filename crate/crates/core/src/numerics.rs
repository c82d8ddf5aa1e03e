//! Dense complex-matrix kernels: eigenstructure with Weyr characteristics,
//! resolvents, spectral (Riesz) projections and pseudospectral grids.
//!
//! Everything here is a pure function of its inputs. Norms are spectral
//! (largest singular value) throughout.

use faer::{Mat, MatRef, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from real row-major data.
pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
    ComplexMatrix::from_fn(rows, cols, |i, j| c64(data[i * cols + j], 0.0))
}

/// Builds a validated matrix from rows of complex entries.
pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::NonFinite);
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch("rows have unequal length".into()));
    }
    let m = ComplexMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    check_finite(&m)?;
    Ok(m)
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) })
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 || m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

pub fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Numerical tolerances shared by all analyses. Every field can be
/// overridden from the command line and is echoed in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Singular values below `rank * scale` count as zero.
    pub rank: f64,
    /// Eigenvalues within `cluster * (1 + spectral radius)` are merged.
    pub cluster: f64,
    /// Inversion is refused when `sigma_min < guard * sigma_max`.
    pub guard: f64,
    /// Eigenvalues with `|z| <= nonzero * max(1, |A||B|)` count as zero.
    pub nonzero: f64,
    /// Resolvent guard for growth-order fits, whose samples approach the
    /// spectrum on purpose.
    pub growth_guard: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-9,
            cluster: 1e-8,
            guard: 1e-12,
            nonzero: 1e-8,
            growth_guard: 1e-15,
        }
    }
}

/// Singular value decomposition with singular values sorted in
/// descending order. `v` holds the right singular vectors as columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

fn to_faer(m: &ComplexMatrix) -> Mat<Complex64> {
    static SEQUENTIAL: std::sync::Once = std::sync::Once::new();
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: MatRef<'_, Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD with singular values in descending order.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    if m.is_empty() {
        return Ok(Svd {
            u: ComplexMatrix::zeros(m.nrows(), 0),
            singular_values: Vec::new(),
            v: ComplexMatrix::zeros(m.ncols(), 0),
        });
    }
    check_finite(m)?;
    let d = to_faer(m)
        .thin_svd()
        .map_err(|_| Error::NumericalBreakdown("SVD did not converge".into()))?;
    Ok(Svd {
        u: from_faer(d.U()),
        singular_values: d.S().column_vector().iter().map(|z| z.re).collect(),
        v: from_faer(d.V()),
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    check_finite(m)?;
    to_faer(m)
        .singular_values()
        .map_err(|_| Error::NumericalBreakdown("SVD did not converge".into()))
}

/// Spectral norm. Returns 0 for empty matrices; panics only if the SVD
/// fails to converge, which does not happen for finite input.
pub fn norm2(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).expect("SVD of a finite matrix").first().copied().unwrap_or(0.0)
}

pub fn sigma_min(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0))
}

/// Orthonormal basis of the numerical range of `m` (columns of U whose
/// singular value exceeds `rel_tol * sigma_max`).
pub fn orthonormal_range(m: &ComplexMatrix, rel_tol: f64) -> Result<ComplexMatrix> {
    if m.ncols() == 0 {
        return Ok(ComplexMatrix::zeros(m.nrows(), 0));
    }
    let d = svd(m)?;
    let thr = rel_tol * d.sigma_max();
    let rank = d.singular_values.iter().filter(|&&s| s > thr && s > 0.0).count();
    Ok(d.u.columns(0, rank).into_owned())
}

/// `m - z I`.
pub fn shift(m: &ComplexMatrix, z: Complex64) -> ComplexMatrix {
    let mut out = m.clone();
    for i in 0..m.nrows().min(m.ncols()) {
        out[(i, i)] -= z;
    }
    out
}

pub fn matrix_power(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let n = m.nrows();
    let mut out = ComplexMatrix::identity(n, n);
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Hermitian part `(m + m^H) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix (after symmetrization), ascending.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    hermitian_eigen(h).0
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian
/// part of `h`.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    if h.is_empty() {
        return (Vec::new(), ComplexMatrix::zeros(h.nrows(), 0));
    }
    let e = to_faer(&hermitian_part(h))
        .self_adjoint_eigen(Side::Lower)
        .expect("Hermitian eigensolver converges on finite input");
    let values = e.S().column_vector().iter().map(|z| z.re).collect();
    (values, from_faer(e.U()))
}

/// Raw eigenvalues of a square matrix.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    require_square(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    check_finite(m)?;
    to_faer(m)
        .eigenvalues()
        .map_err(|_| Error::NumericalBreakdown("eigenvalue iteration did not converge".into()))
}

/// A cluster of numerically coincident eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    /// Mean of the clustered raw eigenvalues.
    pub value: Complex64,
    pub algebraic_mult: usize,
    /// `w_k = dim ker (M - value)^k - dim ker (M - value)^(k-1)`.
    pub weyr: Vec<usize>,
}

impl EigenCluster {
    pub fn geometric_mult(&self) -> usize {
        self.weyr.first().copied().unwrap_or(0)
    }

    /// Length of the longest Jordan chain (the pole order of the resolvent).
    pub fn index(&self) -> usize {
        self.weyr.len()
    }

    pub fn is_semisimple(&self) -> bool {
        self.weyr.len() == 1
    }

    /// `dim ker (M - value)^k`.
    pub fn kernel_dim(&self, k: usize) -> usize {
        self.weyr.iter().take(k).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenstructure {
    pub clusters: Vec<EigenCluster>,
    /// Absolute clustering distance actually used.
    pub cluster_tolerance: f64,
    pub spectral_radius: f64,
}

impl Eigenstructure {
    pub fn dim(&self) -> usize {
        self.clusters.iter().map(|c| c.algebraic_mult).sum()
    }

    /// Index and distance of the cluster closest to `z`.
    pub fn nearest(&self, z: Complex64) -> Option<(usize, f64)> {
        self.clusters
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c.value - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Clusters whose imaginary part is within the clustering distance of
    /// the real axis.
    pub fn real_clusters(&self) -> impl Iterator<Item = &EigenCluster> {
        let tol = self.cluster_tolerance;
        self.clusters.iter().filter(move |c| c.value.im.abs() <= tol)
    }
}

/// Clusters the spectrum of `m` and computes each cluster's Weyr
/// characteristic from ranks of powers `(m - value)^k`.
pub fn eigenstructure(m: &ComplexMatrix, tol: &Tolerances) -> Result<Eigenstructure> {
    let raw = eigenvalues(m)?;
    let rho = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cluster_tolerance = tol.cluster * (1.0 + rho);
    let groups = cluster_points(&raw, cluster_tolerance);

    let mut clusters = Vec::with_capacity(groups.len());
    for members in groups {
        let sum: Complex64 = members.iter().map(|&i| raw[i]).sum();
        let value = sum / members.len() as f64;
        let weyr = weyr_characteristic(m, value, members.len(), tol.rank)?;
        clusters.push(EigenCluster {
            value,
            algebraic_mult: members.len(),
            weyr,
        });
    }
    clusters.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    Ok(Eigenstructure {
        clusters,
        cluster_tolerance,
        spectral_radius: rho,
    })
}

/// Single-linkage grouping of points closer than `radius`.
fn cluster_points(points: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Weyr characteristic of `m` at `lambda` for a cluster of algebraic
/// multiplicity `alg`.
///
/// A singular value of `(m - lambda)^k` counts as zero when it is below
/// `rank_tol * (|m| + |lambda|)^k`. Kernel dimensions are capped at `alg`;
/// if the rank sequence stalls before reaching `alg` (a Jordan block split
/// by roundoff), the missing dimensions are appended as a continued chain
/// so that the result always sums to `alg` and is non-increasing.
pub fn weyr_characteristic(m: &ComplexMatrix, lambda: Complex64, alg: usize, rank_tol: f64) -> Result<Vec<usize>> {
    let n = require_square(m)?;
    if alg == 0 {
        return Ok(Vec::new());
    }
    let shifted = shift(m, lambda);
    let scale = (norm2(m) + lambda.norm()).max(f64::MIN_POSITIVE);
    let mut power = ComplexMatrix::identity(n, n);
    let mut dims: Vec<usize> = Vec::new();
    let mut prev = 0usize;
    for k in 1..=alg {
        power = &power * &shifted;
        let threshold = rank_tol * scale.powi(k as i32);
        let sv = singular_values(&power)?;
        let mut d = sv.iter().filter(|&&s| s <= threshold).count().min(alg);
        if k == 1 {
            d = d.max(1);
        }
        if d <= prev {
            break;
        }
        dims.push(d);
        prev = d;
        if d == alg {
            break;
        }
    }
    let mut weyr: Vec<usize> = dims
        .iter()
        .scan(0usize, |last, &d| {
            let w = d - *last;
            *last = d;
            Some(w)
        })
        .collect();
    if weyr.windows(2).any(|w| w[1] > w[0]) {
        weyr.sort_by(|a, b| b.cmp(a));
    }
    let mut remaining = alg - weyr.iter().sum::<usize>();
    while remaining > 0 {
        let step = weyr.last().copied().unwrap_or(1).min(remaining).max(1);
        weyr.push(step);
        remaining -= step;
    }
    Ok(weyr)
}

/// Orthonormal basis (as columns) of the `dim` right singular vectors of
/// `(m - lambda)^power` with smallest singular values.
pub fn kernel_basis(m: &ComplexMatrix, lambda: Complex64, power: usize, dim: usize) -> Result<ComplexMatrix> {
    Ok(root_bases(m, lambda, power, dim)?.0)
}

/// Right and left kernel bases of `(m - lambda)^power` of prescribed
/// dimension: `(right, left)` with `(m - lambda)^power right ~ 0` and
/// `left^H (m - lambda)^power ~ 0`.
pub fn root_bases(
    m: &ComplexMatrix,
    lambda: Complex64,
    power: usize,
    dim: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = require_square(m)?;
    if dim > n {
        return Err(Error::DimensionMismatch(format!("kernel dimension {dim} exceeds {n}")));
    }
    let p = matrix_power(&shift(m, lambda), power);
    let d = svd(&p)?;
    let right = d.v.columns(n - dim, dim).into_owned();
    let left = d.u.columns(n - dim, dim).into_owned();
    Ok((right, left))
}

/// `(m - lambda)^{-1}`, refusing points where
/// `sigma_min(m - lambda) < guard * sigma_max(m - lambda)`.
pub fn resolvent(m: &ComplexMatrix, lambda: Complex64, guard: f64) -> Result<ComplexMatrix> {
    require_square(m)?;
    let d = svd(&shift(m, lambda))?;
    let (smax, smin) = (d.sigma_max(), d.sigma_min());
    if smax == 0.0 || smin < guard * smax || smin == 0.0 {
        return Err(Error::SpectrumHit {
            re: lambda.re,
            im: lambda.im,
        });
    }
    let scaled = ComplexMatrix::from_fn(d.v.nrows(), d.v.ncols(), |i, j| d.v[(i, j)] / d.singular_values[j]);
    Ok(scaled * d.u.adjoint())
}

/// `|(m - lambda)^{-1}|` without forming the inverse.
pub fn resolvent_norm(m: &ComplexMatrix, lambda: Complex64, guard: f64) -> Result<f64> {
    require_square(m)?;
    let s = singular_values(&shift(m, lambda))?;
    let (smax, smin) = (s[0], *s.last().unwrap());
    if smax == 0.0 || smin < guard * smax || smin == 0.0 {
        return Err(Error::SpectrumHit {
            re: lambda.re,
            im: lambda.im,
        });
    }
    Ok(1.0 / smin)
}

/// Spectral region for a Riesz projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Closed real interval `[lo, hi]`; only (numerically) real eigenvalues
    /// can lie inside.
    Interval { lo: f64, hi: f64 },
    /// Open disk `|z - center| < radius`.
    Disk { center: Complex64, radius: f64 },
}

impl Region {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Region::Interval { lo, hi }
    }

    pub fn disk(center: Complex64, radius: f64) -> Self {
        Region::Disk { center, radius }
    }

    /// Classifies `z` as inside/outside; errors when it is within `guard`
    /// of the boundary.
    fn locate(&self, z: Complex64, guard: f64) -> Result<bool> {
        let hit = Err(Error::BoundaryHit { re: z.re, im: z.im });
        match *self {
            Region::Interval { lo, hi } => {
                if z.im.abs() > guard {
                    return Ok(false);
                }
                if (z.re - lo).abs() <= guard || (z.re - hi).abs() <= guard {
                    return hit;
                }
                Ok(z.re > lo && z.re < hi)
            }
            Region::Disk { center, radius } => {
                let d = (z - center).norm();
                if (d - radius).abs() <= guard {
                    return hit;
                }
                Ok(d < radius)
            }
        }
    }
}

/// Result of a spectral projection: the projector and the total algebraic
/// multiplicity of the captured eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralProjection {
    pub projector: ComplexMatrix,
    pub multiplicity: usize,
    pub captured: Vec<Complex64>,
}

/// Sum of the spectral projections of `m` onto the root subspaces of the
/// eigenvalues inside `region`.
pub fn riesz_projection(m: &ComplexMatrix, region: &Region, tol: &Tolerances) -> Result<ComplexMatrix> {
    let es = eigenstructure(m, tol)?;
    Ok(spectral_projection(m, &es, region)?.projector)
}

/// As [`riesz_projection`], reusing a precomputed eigenstructure of `m`.
///
/// Each captured cluster contributes `R (L^H R)^{-1} L^H`, where `R`, `L`
/// span the right and left root subspaces.
pub fn spectral_projection(m: &ComplexMatrix, es: &Eigenstructure, region: &Region) -> Result<SpectralProjection> {
    let n = require_square(m)?;
    let guard = es.cluster_tolerance;
    let mut projector = ComplexMatrix::zeros(n, n);
    let mut multiplicity = 0;
    let mut captured = Vec::new();
    for cluster in &es.clusters {
        if !region.locate(cluster.value, guard)? {
            continue;
        }
        let (right, left) = root_bases(m, cluster.value, cluster.index(), cluster.algebraic_mult)?;
        let pairing = left.adjoint() * &right;
        let inv = pairing
            .try_inverse()
            .ok_or_else(|| Error::NumericalBreakdown("singular left/right root pairing".into()))?;
        projector += right * inv * left.adjoint();
        multiplicity += cluster.algebraic_mult;
        captured.push(cluster.value);
    }
    Ok(SpectralProjection {
        projector,
        multiplicity,
        captured,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub re: f64,
    pub im: f64,
    pub sigma_min: f64,
}

/// `sigma_min(m - z)` on an `nx` by `ny` grid over `rect`, row-major with
/// the imaginary part as the slow index. Points are evaluated in parallel.
pub fn pseudospectrum_grid(m: &ComplexMatrix, rect: &Rectangle, nx: usize, ny: usize) -> Result<Vec<GridPoint>> {
    require_square(m)?;
    if nx < 2 || ny < 2 {
        return Err(Error::validation("resolution", "need at least 2 points per axis"));
    }
    let step = |lo: f64, hi: f64, count: usize, i: usize| lo + (hi - lo) * i as f64 / (count - 1) as f64;
    (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (iy, ix) = (idx / nx, idx % nx);
            let re = step(rect.re_min, rect.re_max, nx, ix);
            let im = step(rect.im_min, rect.im_max, ny, iy);
            let sigma_min = sigma_min(&shift(m, c64(re, im)))?;
            Ok(GridPoint { re, im, sigma_min })
        })
        .collect()
}
