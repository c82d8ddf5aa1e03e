//! Block-diagonal operator families, their finite truncations, resolvent
//! growth-order fits, and trends of projection norms and negative ranks
//! across truncations.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krein::{block_diagonal, product_pair, FundamentalSymmetry, KreinOperator};
use crate::numerics::{
    self, c64, eigenstructure, from_real, norm2, ComplexMatrix, Eigenstructure, Tolerances,
};
use crate::products::{domination_constants, FactorPair};
use crate::random::{complex_gaussian, fundamental_symmetry, hermitian, seeded, SeededRng};
use crate::signtype::interval_projection_with;

/// Strictly decreasing positive sequence `n -> s(n)`, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceRule {
    /// `n^{-p}`.
    Power(f64),
    /// `r^{n-1}`.
    Geometric(f64),
    Explicit(Vec<f64>),
}

impl SequenceRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceRule::Power(p) if !(p.is_finite() && *p > 0.0) => {
                Err(Error::InvalidRule(format!("power exponent must be positive, got {p}")))
            }
            SequenceRule::Geometric(r) if !(*r > 0.0 && *r < 1.0) => {
                Err(Error::InvalidRule(format!("geometric ratio must lie in (0, 1), got {r}")))
            }
            SequenceRule::Explicit(v) => {
                if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::InvalidRule("explicit sequence must be nonempty and positive".into()));
                }
                if v.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::InvalidRule("explicit sequence must be strictly decreasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> Option<usize> {
        match self {
            SequenceRule::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn value(&self, n: usize) -> Result<f64> {
        match self {
            SequenceRule::Power(p) => Ok((n as f64).powf(-p)),
            SequenceRule::Geometric(r) => Ok(r.powi(n as i32 - 1)),
            SequenceRule::Explicit(v) => v
                .get(n - 1)
                .copied()
                .ok_or_else(|| Error::validation("params.rule", format!("explicit sequence has no entry {n}"))),
        }
    }
}

/// Non-decreasing conditioning sequence `n -> kappa(n) >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditioningRule {
    Constant(f64),
    /// `n^p`.
    Power(f64),
    /// `b^n`.
    Exponential(f64),
    Explicit(Vec<f64>),
}

impl ConditioningRule {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRule(m));
        match self {
            ConditioningRule::Constant(c) if !(*c >= 1.0 && c.is_finite()) => bad(format!("constant must be >= 1, got {c}")),
            ConditioningRule::Power(p) if !(*p >= 0.0 && p.is_finite()) => bad(format!("power must be >= 0, got {p}")),
            ConditioningRule::Exponential(b) if !(*b >= 1.0 && b.is_finite()) => bad(format!("base must be >= 1, got {b}")),
            ConditioningRule::Explicit(v) => {
                if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x >= 1.0)) {
                    return bad("explicit conditioning must be nonempty with entries >= 1".into());
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return bad("explicit conditioning must be non-decreasing".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, n: usize) -> Result<f64> {
        match self {
            ConditioningRule::Constant(c) => Ok(*c),
            ConditioningRule::Power(p) => Ok((n as f64).powf(*p)),
            ConditioningRule::Exponential(b) => Ok(b.powi(n as i32)),
            ConditioningRule::Explicit(v) => v
                .get(n - 1)
                .copied()
                .ok_or_else(|| Error::validation("params.conditioning", format!("no entry {n}"))),
        }
    }
}

fn default_scale_rule() -> SequenceRule {
    SequenceRule::Power(1.0)
}

fn default_eigenvalue_rule() -> SequenceRule {
    SequenceRule::Power(2.0)
}

fn default_conditioning() -> ConditioningRule {
    ConditioningRule::Exponential(2.0)
}

fn default_true() -> bool {
    true
}

fn default_spread() -> f64 {
    0.5
}

fn default_block_size() -> usize {
    2
}

fn default_decay() -> f64 {
    0.5
}

/// `T_n = scale(n) U_n` with `U_n` unitary for the form of `J0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleOneParams {
    #[serde(default = "default_scale_rule")]
    pub rule: SequenceRule,
    /// `U_n = exp(i J0 H_n)` with random Hermitian `H_n` when true, `I` otherwise.
    #[serde(default = "default_true")]
    pub random_unitary: bool,
    /// Norm of `H_n`.
    #[serde(default = "default_spread")]
    pub spread: f64,
}

impl Default for ExampleOneParams {
    fn default() -> Self {
        ExampleOneParams {
            rule: default_scale_rule(),
            random_unitary: true,
            spread: default_spread(),
        }
    }
}

/// `T_n[*] T_n` has eigenvalues `lambda_n` (positive type) and `lambda_n'`
/// (negative type) with eigenvector basis of condition number `kappa(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradedParams {
    #[serde(default = "default_eigenvalue_rule")]
    pub eigenvalues: SequenceRule,
    #[serde(default = "default_conditioning")]
    pub conditioning: ConditioningRule,
}

impl Default for GradedParams {
    fn default() -> Self {
        GradedParams {
            eigenvalues: default_eigenvalue_rule(),
            conditioning: default_conditioning(),
        }
    }
}

/// Random blocks `decay^{n-1} G_n` normalized to norm `1.5`, with an
/// optional leading block whose products are a Jordan block at `planted`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductParams {
    #[serde(default = "default_block_size")]
    pub block_size: usize,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default)]
    pub planted: Option<f64>,
}

impl Default for ProductParams {
    fn default() -> Self {
        ProductParams {
            block_size: default_block_size(),
            decay: default_decay(),
            planted: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    ExampleOne(ExampleOneParams),
    GradedNeutrality(GradedParams),
    ExplicitList(Vec<(ComplexMatrix, FundamentalSymmetry)>),
    ProductOfBlocks(ProductParams),
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::ExampleOne(_) => "ExampleOne",
            FamilyKind::GradedNeutrality(_) => "GradedNeutrality",
            FamilyKind::ExplicitList(_) => "ExplicitList",
            FamilyKind::ProductOfBlocks(_) => "ProductOfBlocks",
        }
    }
}

const PRODUCT_AMPLITUDE: f64 = 1.5;

/// A block-diagonal family `T = (+) T_n` on `(+) J_n`; block `n` is a pure
/// function of `(seed, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFamily {
    kind: FamilyKind,
    seed: u64,
}

/// `J0 = [[0, 1], [1, 0]]`.
pub fn flip() -> FundamentalSymmetry {
    FundamentalSymmetry::flip_blocks(1).expect("flip block is a fundamental symmetry")
}

impl BlockFamily {
    pub fn new(kind: FamilyKind, seed: u64) -> Result<Self> {
        match &kind {
            FamilyKind::ExampleOne(p) => {
                p.rule.validate()?;
                if !(p.spread.is_finite() && p.spread >= 0.0) {
                    return Err(Error::InvalidRule(format!("spread must be >= 0, got {}", p.spread)));
                }
            }
            FamilyKind::GradedNeutrality(p) => {
                p.eigenvalues.validate()?;
                p.conditioning.validate()?;
                if p.eigenvalues.len().is_some_and(|l| l < 2) {
                    return Err(Error::InvalidRule("need at least two eigenvalues".into()));
                }
            }
            FamilyKind::ExplicitList(blocks) => {
                if blocks.is_empty() {
                    return Err(Error::InvalidRule("explicit family has no blocks".into()));
                }
                for (i, (t, j)) in blocks.iter().enumerate() {
                    if t.nrows() != j.dim() || t.ncols() != j.dim() {
                        return Err(Error::DimensionMismatch(format!("block {} does not match its J", i + 1)));
                    }
                }
            }
            FamilyKind::ProductOfBlocks(p) => {
                if p.block_size == 0 {
                    return Err(Error::InvalidRule("block size must be positive".into()));
                }
                if !(p.decay > 0.0 && p.decay < 1.0) {
                    return Err(Error::InvalidRule(format!("decay must lie in (0, 1), got {}", p.decay)));
                }
                if p.planted.is_some_and(|x| !(x.is_finite() && x != 0.0)) {
                    return Err(Error::InvalidRule("planted eigenvalue must be finite and nonzero".into()));
                }
            }
        }
        Ok(BlockFamily { kind, seed })
    }

    pub fn example_one(rule: SequenceRule, random_unitary: bool, seed: u64) -> Result<Self> {
        Self::new(
            FamilyKind::ExampleOne(ExampleOneParams {
                rule,
                random_unitary,
                spread: default_spread(),
            }),
            seed,
        )
    }

    pub fn graded_neutrality(eigenvalues: SequenceRule, conditioning: ConditioningRule, seed: u64) -> Result<Self> {
        Self::new(FamilyKind::GradedNeutrality(GradedParams { eigenvalues, conditioning }), seed)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of blocks, if finite.
    pub fn max_blocks(&self) -> Option<usize> {
        match &self.kind {
            FamilyKind::ExampleOne(p) => p.rule.len(),
            FamilyKind::GradedNeutrality(p) => p.eigenvalues.len(),
            FamilyKind::ExplicitList(b) => Some(b.len()),
            FamilyKind::ProductOfBlocks(_) => None,
        }
    }

    fn block_rng(&self, n: usize) -> SeededRng {
        let mut rng = seeded(self.seed);
        rng.set_stream(n as u64);
        rng
    }

    /// The two eigenvalues `(lambda_n, lambda_n')` of `T_n[*] T_n` for the
    /// graded family.
    pub fn graded_eigenvalues(p: &GradedParams, n: usize) -> Result<(f64, f64)> {
        let l = p.eigenvalues.value(n)?;
        let partner = if n == 1 {
            l + (l - p.eigenvalues.value(2)?) / 2.0
        } else {
            (l + p.eigenvalues.value(n - 1)?) / 2.0
        };
        Ok((l, partner))
    }

    /// Block `n >= 1` as `(T_n, J_n)`.
    pub fn block(&self, n: usize) -> Result<(ComplexMatrix, FundamentalSymmetry)> {
        if n == 0 {
            return Err(Error::validation("n", "blocks are indexed from 1"));
        }
        if self.max_blocks().is_some_and(|m| n > m) {
            return Err(Error::validation("N", format!("family has only {} blocks", self.max_blocks().unwrap())));
        }
        match &self.kind {
            FamilyKind::ExampleOne(p) => {
                let s = p.rule.value(n)?;
                let u = if p.random_unitary {
                    let mut rng = self.block_rng(n);
                    j0_unitary(&mut rng, p.spread)
                } else {
                    ComplexMatrix::identity(2, 2)
                };
                Ok((u * c64(s, 0.0), flip()))
            }
            FamilyKind::GradedNeutrality(p) => {
                let (l, lp) = Self::graded_eigenvalues(p, n)?;
                let kappa = p.conditioning.value(n)?;
                Ok((graded_block(l, lp, kappa), flip()))
            }
            FamilyKind::ExplicitList(b) => Ok(b[n - 1].clone()),
            FamilyKind::ProductOfBlocks(p) => {
                if let Some(x0) = p.planted {
                    if n == 1 {
                        return Ok((planted_block(x0), flip()));
                    }
                }
                let mut rng = self.block_rng(n);
                let k = p.block_size;
                let g = complex_gaussian(&mut rng, k, k);
                let g = &g * c64(PRODUCT_AMPLITUDE * p.decay.powi(n as i32 - 1) / norm2(&g).max(f64::MIN_POSITIVE), 0.0);
                let j = fundamental_symmetry(&mut rng, k);
                Ok((g, j))
            }
        }
    }

    /// Upper bound on `|T_n|`.
    pub fn envelope(&self, n: usize) -> Result<f64> {
        match &self.kind {
            FamilyKind::ExampleOne(p) => {
                let u = if p.random_unitary { p.spread.exp() } else { 1.0 };
                Ok(p.rule.value(n)? * u)
            }
            FamilyKind::GradedNeutrality(p) => {
                let (l, lp) = Self::graded_eigenvalues(p, n)?;
                Ok(l.max(lp).sqrt() * p.conditioning.value(n)?.sqrt())
            }
            FamilyKind::ExplicitList(b) => Ok(norm2(&b[n - 1].0)),
            FamilyKind::ProductOfBlocks(p) => match (p.planted, n) {
                (Some(x0), 1) => Ok(PRODUCT_AMPLITUDE * x0.abs().sqrt()),
                _ => Ok(PRODUCT_AMPLITUDE * p.decay.powi(n as i32 - 1)),
            },
        }
    }
}

/// `exp(i J0 H)` with `H` Hermitian of norm `spread`; unitary for the form
/// of `J0` because `i J0 H` is skew in that form.
fn j0_unitary(rng: &mut impl Rng, spread: f64) -> ComplexMatrix {
    let h = hermitian(rng, 2);
    let h = &h * c64(spread / norm2(&h).max(f64::MIN_POSITIVE), 0.0);
    (flip().matrix() * h * c64(0.0, 1.0)).exp()
}

/// `Q = (1/sqrt 2) [[1, 1], [1, -1]]` carries `diag(1, -1)` to `J0`.
fn q_matrix() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    from_real(2, 2, &[s, s, s, -s])
}

/// `T` with `T[*]T = S diag(l, lp) S^{-1}`, `S` a hyperbolic rotation of
/// condition number `kappa`, all in `J0` coordinates.
fn graded_block(l: f64, lp: f64, kappa: f64) -> ComplexMatrix {
    let t = kappa.ln() / 2.0;
    let s_inv = from_real(2, 2, &[t.cosh(), -t.sinh(), -t.sinh(), t.cosh()]);
    let d = numerics::diag_real(&[l.sqrt(), lp.sqrt()]);
    let q = q_matrix();
    &q * d * s_inv * &q
}

/// Both products of this block equal a 2x2 Jordan block at `x0`.
fn planted_block(x0: f64) -> ComplexMatrix {
    let half_jordan = from_real(2, 2, &[1.0, 0.5, 0.0, 1.0]);
    let c = c64(x0.abs().sqrt(), 0.0);
    if x0 > 0.0 {
        half_jordan * c
    } else {
        numerics::diag_real(&[1.0, -1.0]) * half_jordan * c
    }
}

/// Direct sum of the first `n` blocks.
pub fn truncate(family: &BlockFamily, n: usize) -> Result<KreinOperator> {
    if n == 0 {
        return Err(Error::validation("N", "truncation size must be at least 1"));
    }
    let blocks: Vec<(ComplexMatrix, FundamentalSymmetry)> = (1..=n).map(|k| family.block(k)).collect::<Result<_>>()?;
    let t = block_diagonal(&blocks.iter().map(|b| b.0.clone()).collect::<Vec<_>>());
    let j = FundamentalSymmetry::direct_sum(&blocks.iter().map(|b| b.1.clone()).collect::<Vec<_>>());
    KreinOperator::new(t, j)
}

/// Which matrix of a truncation the trend analyses look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `T` itself.
    Operator,
    /// `T[*]T`.
    #[default]
    First,
    /// `TT[*]`.
    Second,
}

impl Target {
    pub fn select(self, op: &KreinOperator) -> Result<ComplexMatrix> {
        match self {
            Target::Operator => Ok(op.t.clone()),
            Target::First => Ok(product_pair(op)?.0),
            Target::Second => Ok(product_pair(op)?.1),
        }
    }
}

/// `count` points from `hi` down to `lo`, equally spaced in `log y`.
pub fn geometric_grid(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

/// The default grid `1e-1 .. 1e-6` with 24 points.
pub fn default_y_grid() -> Vec<f64> {
    geometric_grid(1e-1, 1e-6, 24)
}

fn validate_grid(ys: &[f64]) -> Result<()> {
    if ys.len() < 3 {
        return Err(Error::validation("y_range", "need at least 3 points"));
    }
    if ys.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
        return Err(Error::validation("y_range", "points must be positive"));
    }
    let r0 = ys[1] / ys[0];
    if (r0 - 1.0).abs() < 1e-12 || ys.windows(2).any(|w| ((w[1] / w[0]) / r0 - 1.0).abs() > 1e-6) {
        return Err(Error::validation("y_range", "points must form a geometric sequence"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventSample {
    pub y: f64,
    pub resolvent_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthFit {
    pub x0: f64,
    /// `max(raw_slope, 1)`.
    pub m_hat: f64,
    pub raw_slope: f64,
    /// `ceil(m_hat - 0.1)`.
    pub m: u32,
    /// Largest `|R(x0 + iy)| y^m / (1 + |x0 + iy|)^{2m-2}` over the samples.
    pub big_m_hat: f64,
    pub samples: Vec<ResolventSample>,
    /// `(smallest y, largest y)` of the fitted window.
    pub window: (f64, f64),
    pub window_stable: bool,
    /// Root-mean-square residual of the log-log least-squares fit.
    pub fit_residual: f64,
}

/// Maximum spread of consecutive slopes inside the fitting window.
pub const SLOPE_STABILITY: f64 = 0.05;

/// Fits the growth order of `|(A - (x0 + iy))^{-1}|` as `y -> 0`.
pub fn growth_order_fit(a: &ComplexMatrix, x0: f64, ys: &[f64], guard: f64) -> Result<GrowthFit> {
    validate_grid(ys)?;
    let mut samples: Vec<ResolventSample> = ys
        .par_iter()
        .map(|&y| {
            numerics::resolvent_norm(a, c64(x0, y), guard).map(|r| ResolventSample { y, resolvent_norm: r })
        })
        .collect::<Result<_>>()?;
    samples.sort_by(|p, q| p.y.total_cmp(&q.y));

    let logs: Vec<(f64, f64)> = samples.iter().map(|s| (-s.y.ln(), s.resolvent_norm.ln())).collect();
    let slopes: Vec<f64> = logs.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let y_min = samples[0].y;
    let mut end = samples.iter().take_while(|s| s.y <= 10.0 * y_min * (1.0 + 1e-9)).count().max(3);
    end = end.min(samples.len());
    // Slopes on pairs fully inside the decade; `slopes[i]` joins points i and i+1.
    let spread = |end: usize| {
        let w = &slopes[..end - 1];
        w.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - w.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let window_stable = spread(end) < SLOPE_STABILITY;

    let pts = &logs[..end];
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let raw_slope = sxy / sxx;
    let intercept = my - raw_slope * mx;
    let fit_residual = (pts.iter().map(|p| (p.1 - intercept - raw_slope * p.0).powi(2)).sum::<f64>() / k).sqrt();

    let m_hat = raw_slope.max(1.0);
    let m = (m_hat - 0.1).ceil().max(1.0) as u32;
    let big_m_hat = samples
        .iter()
        .map(|s| {
            let lam = c64(x0, s.y).norm();
            s.resolvent_norm * s.y.powi(m as i32) / (1.0 + lam).powi(2 * m as i32 - 2)
        })
        .fold(0.0, f64::max);
    Ok(GrowthFit {
        x0,
        m_hat,
        raw_slope,
        m,
        big_m_hat,
        window: (samples[0].y, samples[end - 1].y),
        window_stable,
        fit_residual,
        samples,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartnerGrowthReport {
    /// Fit for `T[*]T`.
    pub fit_first: GrowthFit,
    /// Fit for `TT[*]`.
    pub fit_second: GrowthFit,
    pub m_hat_first: f64,
    pub m_hat_second: f64,
    /// Order `m + 1` used in the bound for `T[*]T`, `m` from the `TT[*]` fit.
    pub bound_order: u32,
    /// `K` in `|R_first(l)| <= K (1 + |l|)^{2m} / |Im l|^{m+1}`.
    pub bound_constant: f64,
    pub mu: Complex64,
    pub domination_constant: f64,
    /// Largest ratio of the sampled resolvent norm to the bound.
    pub max_bound_ratio: f64,
    pub bound_holds: bool,
}

/// Fits the growth order of `TT[*]` at `x0` and checks that `T[*]T`
/// obeys the derived bound of order `m + 1` at the same sample points.
pub fn partner_growth_check(
    op: &KreinOperator,
    x0: f64,
    ys: &[f64],
    seed: u64,
    tol: &Tolerances,
) -> Result<PartnerGrowthReport> {
    if x0 == 0.0 {
        return Err(Error::validation("x0", "must be nonzero"));
    }
    let (first, second) = product_pair(op)?;
    let fit_second = growth_order_fit(&second, x0, ys, tol.growth_guard)?;
    let fit_first = growth_order_fit(&first, x0, ys, tol.growth_guard)?;
    let m = fit_second.m;
    let big_m = fit_second.big_m_hat.max(1.0);

    let pair = FactorPair::from_operator(op);
    let dom = domination_constants(&pair, seed);
    let radius = numerics::eigenvalues(&first)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mu = c64(x0, 1.0 + radius);
    let m2 = numerics::resolvent_norm(&first, mu, tol.guard)?.max(1.0);
    let c = mu.norm();
    let bound_constant = dom.constant * m2 * big_m * (c + 2.0 * c.max(1.0) * (2.0 + c));

    let max_bound_ratio = fit_first
        .samples
        .iter()
        .map(|s| {
            let lam = c64(x0, s.y).norm();
            let bound = bound_constant * (1.0 + lam).powi(2 * m as i32) / s.y.powi(m as i32 + 1);
            s.resolvent_norm / bound
        })
        .fold(0.0, f64::max);
    Ok(PartnerGrowthReport {
        m_hat_first: fit_first.m_hat,
        m_hat_second: fit_second.m_hat,
        fit_first,
        fit_second,
        bound_order: m + 1,
        bound_constant,
        mu,
        domination_constant: dom.constant,
        max_bound_ratio,
        bound_holds: max_bound_ratio <= 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrendMetric {
    ProjectionNorm,
    NegativeRank,
    GrowthOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

/// Bounded when the last half varies by at most this ratio.
pub const BOUNDED_RATIO: f64 = 2.0;
/// Growing when monotone with at least this end-to-end ratio.
pub const GROWING_RATIO: f64 = 4.0;

/// Classifies a sequence of nonnegative values.
pub fn verdict(values: &[f64]) -> Verdict {
    if values.is_empty() {
        return Verdict::Inconclusive;
    }
    let tail = &values[values.len() / 2..];
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi == 0.0 || (lo > 0.0 && hi / lo <= BOUNDED_RATIO) {
        return Verdict::Bounded;
    }
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    let (first, last) = (values[0], *values.last().unwrap());
    if monotone && first > 0.0 && last / first >= GROWING_RATIO {
        return Verdict::Growing;
    }
    Verdict::Inconclusive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intervals {
    Fixed { lo: f64, hi: f64 },
    /// One interval per entry of `n_values`.
    PerTruncation(Vec<(f64, f64)>),
}

impl Intervals {
    fn get(&self, i: usize) -> (f64, f64) {
        match self {
            Intervals::Fixed { lo, hi } => (*lo, *hi),
            Intervals::PerTruncation(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationTrend {
    pub n_values: Vec<usize>,
    pub metric: TrendMetric,
    pub values: Vec<f64>,
    /// Intervals actually used after endpoint adjustment.
    pub intervals: Vec<(f64, f64)>,
    pub verdict: Verdict,
    pub bounded_ratio: f64,
    pub growing_ratio: f64,
}

/// Moves an endpoint that is within `guard` of a real eigenvalue to the
/// middle of the neighbouring spectral gap on the outer side.
fn adjust_endpoint(x: f64, outward: f64, reals: &[f64], guard: f64) -> f64 {
    let Some(&hit) = reals.iter().find(|&&r| (r - x).abs() <= guard) else {
        return x;
    };
    let next = reals
        .iter()
        .filter(|&&r| (r - hit) * outward > guard)
        .min_by(|a, b| (*a - hit).abs().total_cmp(&(*b - hit).abs()));
    match next {
        Some(&r) => (hit + r) / 2.0,
        None => hit + outward * (1.0 + hit.abs()),
    }
}

fn adjusted_interval(es: &Eigenstructure, lo: f64, hi: f64) -> (f64, f64) {
    let mut reals: Vec<f64> = es.real_clusters().map(|c| c.value.re).collect();
    reals.sort_by(f64::total_cmp);
    let guard = 1e3 * es.cluster_tolerance;
    (adjust_endpoint(lo, -1.0, &reals, guard), adjust_endpoint(hi, 1.0, &reals, guard))
}

fn validate_intervals(intervals: &Intervals, n_values: &[usize]) -> Result<()> {
    if n_values.is_empty() {
        return Err(Error::validation("n_values", "need at least one truncation size"));
    }
    if let Intervals::PerTruncation(v) = intervals {
        if v.len() != n_values.len() {
            return Err(Error::validation("intervals", "need one interval per truncation size"));
        }
    }
    Ok(())
}

struct IntervalSample {
    norm: f64,
    n_minus: usize,
    interval: (f64, f64),
}

fn interval_sweep(
    family: &BlockFamily,
    intervals: &Intervals,
    n_values: &[usize],
    target: Target,
    tol: &Tolerances,
) -> Result<Vec<IntervalSample>> {
    validate_intervals(intervals, n_values)?;
    n_values
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let op = truncate(family, n)?;
            let a = target.select(&op)?;
            let es = eigenstructure(&a, tol)?;
            let (lo, hi) = intervals.get(i);
            let (lo, hi) = adjusted_interval(&es, lo, hi);
            let e = interval_projection_with(&a, &op.j, &es, lo, hi)?;
            Ok(IntervalSample {
                norm: e.norm,
                n_minus: e.inertia_on_range.n_minus,
                interval: (lo, hi),
            })
        })
        .collect()
}

fn trend(n_values: &[usize], metric: TrendMetric, values: Vec<f64>, intervals: Vec<(f64, f64)>) -> TruncationTrend {
    TruncationTrend {
        n_values: n_values.to_vec(),
        metric,
        verdict: verdict(&values),
        values,
        intervals,
        bounded_ratio: BOUNDED_RATIO,
        growing_ratio: GROWING_RATIO,
    }
}

/// `|E_N(Delta)|` across truncations.
pub fn projection_trend(
    family: &BlockFamily,
    intervals: &Intervals,
    n_values: &[usize],
    target: Target,
    tol: &Tolerances,
) -> Result<TruncationTrend> {
    let s = interval_sweep(family, intervals, n_values, target, tol)?;
    Ok(trend(
        n_values,
        TrendMetric::ProjectionNorm,
        s.iter().map(|x| x.norm).collect(),
        s.iter().map(|x| x.interval).collect(),
    ))
}

/// Number of negative squares of the form on `range E_N(Delta)`.
pub fn negative_rank_trend(
    family: &BlockFamily,
    intervals: &Intervals,
    n_values: &[usize],
    target: Target,
    tol: &Tolerances,
) -> Result<TruncationTrend> {
    let s = interval_sweep(family, intervals, n_values, target, tol)?;
    Ok(trend(
        n_values,
        TrendMetric::NegativeRank,
        s.iter().map(|x| x.n_minus as f64).collect(),
        s.iter().map(|x| x.interval).collect(),
    ))
}

/// Fitted growth order at `x0` across truncations.
pub fn growth_trend(
    family: &BlockFamily,
    x0: f64,
    ys: &[f64],
    n_values: &[usize],
    target: Target,
    tol: &Tolerances,
) -> Result<TruncationTrend> {
    if n_values.is_empty() {
        return Err(Error::validation("n_values", "need at least one truncation size"));
    }
    let values: Vec<f64> = n_values
        .par_iter()
        .map(|&n| {
            let a = target.select(&truncate(family, n)?)?;
            Ok(growth_order_fit(&a, x0, ys, tol.growth_guard)?.m_hat)
        })
        .collect::<Result<_>>()?;
    Ok(trend(n_values, TrendMetric::GrowthOrder, values, Vec::new()))
}

/// Intervals `(-1, (lambda_N + lambda_N') / 2)` for the graded family: each
/// captures `lambda_N` but not its partner, and shrinks toward zero.
pub fn graded_shrinking_intervals(family: &BlockFamily, n_values: &[usize]) -> Result<Intervals> {
    let FamilyKind::GradedNeutrality(p) = family.kind() else {
        return Err(Error::validation("family", "shrinking intervals need a graded family"));
    };
    let v = n_values
        .iter()
        .map(|&n| {
            let (l, lp) = BlockFamily::graded_eigenvalues(p, n)?;
            Ok((-1.0, (l + lp) / 2.0))
        })
        .collect::<Result<_>>()?;
    Ok(Intervals::PerTruncation(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::{krein_adjoint, Inertia};
    use crate::numerics::diag_real;
    use crate::signtype::{classify_spectrum, product_signtype_compare, SignType};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn harmonic(random: bool) -> BlockFamily {
        BlockFamily::example_one(SequenceRule::Power(1.0), random, 7).unwrap()
    }

    #[test]
    fn rules_are_validated() {
        assert!(BlockFamily::example_one(SequenceRule::Power(-1.0), false, 0).is_err());
        assert!(BlockFamily::example_one(SequenceRule::Geometric(1.5), false, 0).is_err());
        assert!(matches!(
            BlockFamily::example_one(SequenceRule::Explicit(vec![1.0, 1.0]), false, 0),
            Err(Error::InvalidRule(_))
        ));
        assert!(BlockFamily::graded_neutrality(SequenceRule::Power(2.0), ConditioningRule::Explicit(vec![2.0, 1.0]), 0).is_err());
        assert!(BlockFamily::graded_neutrality(SequenceRule::Power(2.0), ConditioningRule::Constant(0.5), 0).is_err());
    }

    #[test]
    fn example_one_truncation_assembly() {
        let op = truncate(&harmonic(false), 2).unwrap();
        assert_eq!(op.t, diag_real(&[1.0, 1.0, 0.5, 0.5]));
        assert_eq!(op.j, FundamentalSymmetry::flip_blocks(2).unwrap());
        let one = truncate(&harmonic(true), 1).unwrap();
        assert_eq!(one.t, harmonic(true).block(1).unwrap().0);
    }

    #[test]
    fn random_blocks_are_j0_unitary() {
        let f = harmonic(true);
        for n in 1..=10 {
            let (t, j) = f.block(n).unwrap();
            let s = 1.0 / n as f64;
            let u = &t / c64(s, 0.0);
            let err = norm2(&(krein_adjoint(&u, &j).unwrap() * &u - ComplexMatrix::identity(2, 2)));
            assert!(err < 1e-13, "block {n}: {err}");
            assert!(norm2(&t) <= f.envelope(n).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn truncations_are_deterministic_and_nested() {
        for f in [
            harmonic(true),
            BlockFamily::new(FamilyKind::ProductOfBlocks(ProductParams { block_size: 3, ..Default::default() }), 4).unwrap(),
        ] {
            let a = truncate(&f, 5).unwrap();
            let b = truncate(&f, 5).unwrap();
            assert_eq!(a, b);
            let c = truncate(&f, 6).unwrap();
            let k = a.dim();
            assert_eq!(c.t.view((0, 0), (k, k)).into_owned(), a.t);
            assert_eq!(c.j.matrix().view((0, 0), (k, k)).into_owned(), *a.j.matrix());
        }
    }

    #[test]
    fn example_one_eigenvalues_are_critical_for_both_products() {
        for n in [1, 3, 8] {
            let op = truncate(&harmonic(true), n).unwrap();
            let r = product_signtype_compare(&op, &tol()).unwrap();
            assert!(r.holds);
            assert_eq!(r.critical_first.len(), n);
            assert_eq!(r.critical_second.len(), n);
            for c in &r.first {
                assert_eq!(c.eigenspace_inertia, Inertia::new(1, 0, 1));
            }
        }
    }

    #[test]
    fn graded_block_has_requested_structure() {
        let f = BlockFamily::graded_neutrality(SequenceRule::Power(2.0), ConditioningRule::Power(1.0), 0).unwrap();
        let FamilyKind::GradedNeutrality(p) = f.kind() else { unreachable!() };
        for n in 1..=6 {
            let (t, j) = f.block(n).unwrap();
            let op = KreinOperator::new(t, j.clone()).unwrap();
            let (h, _) = product_pair(&op).unwrap();
            let (l, lp) = BlockFamily::graded_eigenvalues(p, n).unwrap();
            let classes = classify_spectrum(&h, &j, &tol()).unwrap();
            assert_eq!(classes.len(), 2);
            let pos = classes.iter().find(|c| (c.eigenvalue - l).abs() < 1e-10).unwrap();
            let neg = classes.iter().find(|c| (c.eigenvalue - lp).abs() < 1e-10).unwrap();
            assert_eq!(pos.sign_type, SignType::PositiveType);
            assert_eq!(neg.sign_type, SignType::NegativeType);
            // The spectral projection onto lambda_n has norm (kappa + 1/kappa) / 2.
            let e = interval_projection_with(&h, &j, &eigenstructure(&h, &tol()).unwrap(), -1.0, (l + lp) / 2.0).unwrap();
            let kappa = n as f64;
            assert!((e.norm - (kappa + 1.0 / kappa) / 2.0).abs() < 1e-9 * kappa);
        }
    }

    #[test]
    fn unit_conditioning_gives_unit_projections() {
        let f = BlockFamily::graded_neutrality(SequenceRule::Power(2.0), ConditioningRule::Constant(1.0), 0).unwrap();
        let ns = [2, 4, 6];
        let iv = graded_shrinking_intervals(&f, &ns).unwrap();
        let t = projection_trend(&f, &iv, &ns, Target::First, &tol()).unwrap();
        assert!(t.values.iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert_eq!(t.verdict, Verdict::Bounded);
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict(&[0.0, 0.0, 0.0]), Verdict::Bounded);
        assert_eq!(verdict(&[1.0, 1.5, 1.2, 1.9]), Verdict::Bounded);
        assert_eq!(verdict(&[1.0, 3.0, 9.0, 27.0]), Verdict::Growing);
        assert_eq!(verdict(&[1.0, 3.0, 2.5, 27.0]), Verdict::Inconclusive);
    }

    #[test]
    fn disjoint_interval_gives_zero_norms() {
        let t = projection_trend(&harmonic(true), &Intervals::Fixed { lo: 2.0, hi: 3.0 }, &[2, 4], Target::First, &tol()).unwrap();
        assert_eq!(t.values, vec![0.0, 0.0]);
        assert_eq!(t.verdict, Verdict::Bounded);
    }

    #[test]
    fn endpoints_on_eigenvalues_are_moved_outward() {
        // 0.25 is an eigenvalue of the N = 4 truncation; the interval widens
        // to the gap below it and so still captures it.
        let t = negative_rank_trend(&harmonic(false), &Intervals::Fixed { lo: 0.25, hi: 1.1 }, &[4], Target::First, &tol()).unwrap();
        assert!(t.intervals[0].0 < 0.25 && t.intervals[0].0 > 1.0 / 9.0);
        assert_eq!(t.values, vec![2.0]);
    }

    #[test]
    fn negative_rank_grows_on_shrinking_intervals_toward_zero() {
        // (-1, 1.5/16) holds the blocks n >= 4, one negative square each.
        let iv = Intervals::Fixed { lo: -1.0, hi: 1.5 / 16.0 };
        let t = negative_rank_trend(&harmonic(true), &iv, &[4, 8, 12], Target::First, &tol()).unwrap();
        assert_eq!(t.values, vec![1.0, 5.0, 9.0]);
    }

    #[test]
    fn growth_fit_examples() {
        let ys = default_y_grid();
        let f = growth_order_fit(&diag_real(&[0.3, 0.3]), 0.3, &ys, 1e-14).unwrap();
        assert!((f.m_hat - 1.0).abs() <= 0.05 && f.m == 1);
        let jordan = from_real(2, 2, &[0.3, 1.0, 0.0, 0.3]);
        let f = growth_order_fit(&jordan, 0.3, &ys, 1e-14).unwrap();
        assert!((f.m_hat - 2.0).abs() <= 0.1, "{}", f.m_hat);
        assert_eq!(f.m, 2);
        let f = growth_order_fit(&diag_real(&[0.3, 0.3]), 5.0, &ys, 1e-14).unwrap();
        assert!(f.raw_slope.abs() < 0.01);
        assert_eq!(f.m_hat, 1.0);
    }

    #[test]
    fn growth_fit_rejects_bad_grids() {
        let a = diag_real(&[1.0]);
        assert!(growth_order_fit(&a, 1.0, &[0.1, 0.01], 1e-14).is_err());
        assert!(growth_order_fit(&a, 1.0, &[0.1, 0.01, 0.002], 1e-14).is_err());
        assert!(growth_order_fit(&a, 1.0, &[0.1, -0.01, 0.001], 1e-14).is_err());
    }

    #[test]
    fn fitted_constant_bounds_every_sample() {
        let jordan = from_real(2, 2, &[0.3, 1.0, 0.0, 0.3]);
        let f = growth_order_fit(&jordan, 0.3, &default_y_grid(), 1e-14).unwrap();
        for s in &f.samples {
            let lam = c64(0.3, s.y).norm();
            let bound = f.big_m_hat * (1.0 + lam).powi(2 * f.m as i32 - 2) / s.y.powi(f.m as i32);
            assert!(s.resolvent_norm <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn partner_check_on_fixtures() {
        let ys = default_y_grid();
        let op = truncate(&harmonic(false), 3).unwrap();
        let r = partner_growth_check(&op, 1.0, &ys, 0, &tol()).unwrap();
        assert!(r.bound_holds);
        assert!((r.m_hat_first - 1.0).abs() < 0.05 && (r.m_hat_second - 1.0).abs() < 0.05);

        let op = KreinOperator::new(from_real(2, 2, &[0.0, 2.0, 1.0, 0.0]), FundamentalSymmetry::from_signature(&[1, -1]).unwrap()).unwrap();
        let r = partner_growth_check(&op, -1.0, &ys, 0, &tol()).unwrap();
        assert!(r.bound_holds);
        assert!((r.m_hat_first - 1.0).abs() < 0.05 && (r.m_hat_second - 1.0).abs() < 0.05);
    }

    #[test]
    fn planted_jordan_block_has_order_two() {
        for x0 in [1.0, -0.8] {
            let f = BlockFamily::new(
                FamilyKind::ProductOfBlocks(ProductParams { planted: Some(x0), ..Default::default() }),
                3,
            )
            .unwrap();
            let op = truncate(&f, 4).unwrap();
            let r = partner_growth_check(&op, x0, &default_y_grid(), 0, &tol()).unwrap();
            assert!((r.m_hat_second - 2.0).abs() <= 0.15, "x0 {x0}: {}", r.m_hat_second);
            assert_eq!(r.bound_order, 3);
            assert!(r.bound_holds);
        }
    }
}
