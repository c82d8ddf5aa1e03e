//! The `kreinlab` command line.
//!
//! `kreinlab <command> <spec.json> [flags]` loads an operator spec, runs one
//! analysis and prints a JSON report. Exit codes: 0 when every checked
//! property held, 2 when the report lists violations, 1 on bad input.
//! Errors go to stderr as `{"error": {"kind", "message"}}`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::family::{self, Intervals, Target};
use crate::io::{self, matrix_to_json, OperatorSpec};
use crate::krein::{self, FundamentalSymmetry};
use crate::numerics::{self, c64, norm2, ComplexMatrix, Rectangle, Tolerances};
use crate::products::{self, FactorPair};
use crate::signtype;

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "KREINLAB_SEED";

/// Relative tolerance for comparing a result against a spec's `"oracle"`.
pub const ORACLE_TOL: f64 = 1e-9;
/// Involution residual `|T[*][*] - T|` allowed relative to `|T|`.
pub const INVOLUTION_TOL: f64 = 1e-12;
/// Resolvent identity residuals allowed relative to `|(BA - l)^{-1}|`.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Round-trip residual allowed for eigenspace transport.
pub const ROUND_TRIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Adjoint,
    Products,
    CompareSpectra,
    Transport,
    ResolventIdentities,
    ResolventBound,
    PoleOrder,
    Classify,
    Critical,
    Projection,
    Definitize,
    FamilyAnalyze,
    GrowthFit,
    Pseudospectrum,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    fn accepts_oracle(self) -> bool {
        matches!(
            self,
            Command::Adjoint | Command::Products | Command::Projection | Command::ResolventIdentities
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Projection,
    NegativeRank,
    Growth,
    PartnerGrowth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Operator,
    First,
    Second,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Operator => Target::Operator,
            TargetArg::First => Target::First,
            TargetArg::Second => Target::Second,
        }
    }
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().ok().filter(|x| x.is_finite());
    match parts.as_slice() {
        [re] => num(re).map(|re| c64(re, 0.0)),
        [re, im] => num(re).zip(num(im)).map(|(re, im)| c64(re, im)),
        _ => None,
    }
    .ok_or_else(|| format!("expected `re` or `re,im`, got `{s}`"))
}

/// Comma-separated truncation sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sizes(pub Vec<usize>);

fn parse_sizes(s: &str) -> std::result::Result<Sizes, String> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>().ok().filter(|&n| n > 0))
        .collect::<Option<Vec<_>>>()
        .filter(|v| !v.is_empty())
        .map(Sizes)
        .ok_or_else(|| format!("expected a comma-separated list of positive integers, got `{s}`"))
}

#[derive(Debug, Parser)]
#[command(name = "kreinlab", version, about = "Spectral analysis of operator products in finite-dimensional Krein spaces")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Operator spec (JSON).
    pub spec: PathBuf,

    #[arg(long, default_value_t = Tolerances::default().rank)]
    pub tol_rank: f64,
    #[arg(long, default_value_t = Tolerances::default().cluster)]
    pub tol_cluster: f64,
    #[arg(long, default_value_t = Tolerances::default().guard)]
    pub tol_guard: f64,
    #[arg(long, default_value_t = Tolerances::default().nonzero)]
    pub tol_nonzero: f64,
    #[arg(long, default_value_t = Tolerances::default().growth_guard)]
    pub tol_growth_guard: f64,
    /// Seed for randomized searches and families without their own seed.
    /// Defaults to $KREINLAB_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV destination for grid outputs (`growth-fit`, `pseudospectrum`).
    #[arg(long)]
    pub grid_out: Option<PathBuf>,

    /// Spectral parameter `re[,im]`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda: Option<Complex64>,
    /// Second spectral parameter `re[,im]`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub mu: Option<Complex64>,
    /// Kernel power for `transport`.
    #[arg(long, default_value_t = 1)]
    pub power: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 4)]
    pub max_degree: usize,
    /// Matrix analysed by single-matrix commands.
    #[arg(long, value_enum, default_value_t = TargetArg::First)]
    pub target: TargetArg,
    /// Truncation size for family specs.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub analysis: Option<Analysis>,
    #[arg(long, value_parser = parse_sizes, default_value = "4,8,16,32")]
    pub n_values: Sizes,
    /// Use the shrinking intervals of a graded family.
    #[arg(long)]
    pub shrinking: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, default_value_t = 1e-1)]
    pub y_max: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub y_min: f64,
    #[arg(long, default_value_t = 24)]
    pub y_count: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_max: Option<f64>,
    #[arg(long, default_value_t = 41)]
    pub nx: usize,
    #[arg(long, default_value_t = 41)]
    pub ny: usize,
}

impl Cli {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rank: self.tol_rank,
            cluster: self.tol_cluster,
            guard: self.tol_guard,
            nonzero: self.tol_nonzero,
            growth_guard: self.tol_growth_guard,
        }
    }

    fn y_grid(&self) -> Result<Vec<f64>> {
        if !(self.y_min > 0.0 && self.y_max > self.y_min) || self.y_count < 2 {
            return Err(Error::validation("--y-min/--y-max/--y-count", "need 0 < y_min < y_max and at least 2 points"));
        }
        Ok(family::geometric_grid(self.y_max, self.y_min, self.y_count))
    }
}

/// An analysis report before serialization.
#[derive(Debug, Default)]
pub struct Report {
    pub args: serde_json::Map<String, Value>,
    pub thresholds: serde_json::Map<String, Value>,
    pub results: Value,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub grid_csv: Option<String>,
}

impl Report {
    fn arg(&mut self, key: &str, v: impl Serialize) {
        self.args.insert(key.into(), json!(v));
    }

    fn threshold(&mut self, key: &str, v: f64) {
        self.thresholds.insert(key.into(), json!(v));
    }

    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(message());
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn complex_json(z: Complex64) -> Value {
    io::complex_to_json(z)
}

fn require<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::validation(flag, "required for this command"))
}

fn target_matrix(spec: &OperatorSpec, cli: &Cli) -> Result<(ComplexMatrix, FundamentalSymmetry)> {
    let op = spec.operator(cli.n)?;
    Ok((Target::from(cli.target).select(&op)?, op.j))
}

fn target_name(t: TargetArg) -> &'static str {
    match t {
        TargetArg::Operator => "operator",
        TargetArg::First => "first",
        TargetArg::Second => "second",
    }
}

fn compare_oracle(spec: &OperatorSpec, computed: &ComplexMatrix, report: &mut Report) -> Result<()> {
    let Some(oracle) = &spec.oracle else {
        return Ok(());
    };
    if oracle.shape() != computed.shape() {
        return Err(Error::DimensionMismatch(format!(
            "oracle is {}x{} but the result is {}x{}",
            oracle.nrows(),
            oracle.ncols(),
            computed.nrows(),
            computed.ncols()
        )));
    }
    let diff = norm2(&(oracle - computed));
    let allowed = ORACLE_TOL * norm2(computed).max(1.0);
    report.threshold("oracle_relative", ORACLE_TOL);
    report.results["oracle_discrepancy"] = json!(diff);
    report.check(diff <= allowed, || format!("result differs from the oracle by {diff:e} (allowed {allowed:e})"));
    Ok(())
}

fn adjoint(spec: &OperatorSpec, cli: &Cli, r: &mut Report) -> Result<()> {
    let op = spec.operator(cli.n)?;
    let adj = krein::krein_adjoint(&op.t, &op.j)?;
    let back = krein::krein_adjoint(&adj, &op.j)?;
    let involution = norm2(&(&back - &op.t));
    let defect = krein::selfadjoint_defect(&op.t, &op.j)?;
    r.threshold("involution_relative", INVOLUTION_TOL);
    r.threshold("selfadjoint", signtype::SELFADJOINT_TOL);
    r.results = json!({
        "adjoint": matrix_to_json(&adj),
        "involution_residual": involution,
        "selfadjoint_defect": defect,
        "is_j_selfadjoint": krein::is_j_selfadjoint(&op.t, &op.j, signtype::SELFADJOINT_TOL)?,
    });
    let allowed = INVOLUTION_TOL * norm2(&op.t).max(1.0);
    r.check(involution <= allowed, || format!("involution residual {involution:e} exceeds {allowed:e}"));
    compare_oracle(spec, &adj, r)
}

fn products_cmd(spec: &OperatorSpec, cli: &Cli, r: &mut Report) -> Result<()> {
    let op = spec.operator(cli.n)?;
    let adj = op.adjoint();
    let first = &adj * &op.t;
    let second = &op.t * &adj;
    let (d1, d2) = (krein::selfadjoint_defect(&first, &op.j)?, krein::selfadjoint_defect(&second, &op.j)?);
    r.threshold("selfadjoint", krein::PRODUCT_SELFADJOINT_TOL);
    r.results = json!({
        "first": matrix_to_json(&first),
        "second": matrix_to_json(&second),
        "first_selfadjoint_defect": d1,
        "second_selfadjoint_defect": d2,
    });
    for (name, m) in [("T[*]T", &first), ("TT[*]", &second)] {
        let ok = krein::is_j_selfadjoint(m, &op.j, krein::PRODUCT_SELFADJOINT_TOL)?;
        r.check(ok, || format!("{name} is not J-selfadjoint"));
    }
    compare_oracle(spec, &first, r)
}

fn compare_spectra(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let pair = spec.factor_pair(cli.n)?;
    let rep = products::compare_nonzero_spectra(&pair, tol)?;
    r.threshold("nonzero_threshold", pair.zero_threshold(tol));
    r.check(rep.matched, || "nonzero spectra of AB and BA do not match".into());
    r.results = to_value(&rep);
    Ok(())
}

fn transport(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let pair = spec.factor_pair(cli.n)?;
    let lambda = require(cli.lambda, "--lambda")?;
    r.arg("lambda", complex_json(lambda));
    r.arg("power", cli.power);
    r.threshold("angle_sine", products::TRANSPORT_ANGLE_TOL);
    r.threshold("round_trip", ROUND_TRIP_TOL);
    match products::eigenspace_transport(&pair, lambda, cli.power, tol) {
        Ok(t) => {
            r.check(t.dim_ab == t.dim_ba, || format!("kernel dimensions differ: {} vs {}", t.dim_ba, t.dim_ab));
            if let Some(res) = t.round_trip_residual {
                r.check(res <= ROUND_TRIP_TOL, || format!("round-trip residual {res:e} exceeds {ROUND_TRIP_TOL:e}"));
            }
            r.results = json!({
                "eigenvalue_ba": complex_json(t.eigenvalue_ba),
                "eigenvalue_ab": complex_json(t.eigenvalue_ab),
                "power": t.power,
                "dim_ba": t.dim_ba,
                "dim_ab": t.dim_ab,
                "forward": matrix_to_json(&t.forward),
                "inverse": matrix_to_json(&t.inverse),
                "max_angle_sine": t.max_angle_sine,
                "round_trip_residual": t.round_trip_residual,
            });
            Ok(())
        }
        Err(Error::TransportFailure(m)) => {
            r.violations.push(format!("transport failed: {m}"));
            r.results = json!({ "transport_failure": m });
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn resolvent_identities(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let pair = spec.factor_pair(cli.n)?;
    let lambda = require(cli.lambda, "--lambda")?;
    let mu = require(cli.mu, "--mu")?;
    r.arg("lambda", complex_json(lambda));
    r.arg("mu", complex_json(mu));
    r.threshold("identity_relative", IDENTITY_TOL);
    let res = products::resolvent_identity_residuals(&pair, lambda, mu, tol.guard)?;
    let allowed = IDENTITY_TOL * res.resolvent_norm.max(1.0);
    r.check(res.residual_ppp <= allowed, || format!("single-parameter residual {:e} exceeds {allowed:e}", res.residual_ppp));
    r.check(res.residual_two_param <= allowed, || {
        format!("two-parameter residual {:e} exceeds {allowed:e}", res.residual_two_param)
    });
    let r_ba = numerics::resolvent(&pair.ba(), lambda, tol.guard)?;
    let via_ab = products::resolvent_via_ab(&pair, lambda, tol.guard)?;
    r.results = json!({
        "residual_ppp": res.residual_ppp,
        "residual_two_param": res.residual_two_param,
        "resolvent_norm": res.resolvent_norm,
        "resolvent_ba": matrix_to_json(&r_ba),
        "resolvent_via_ab": matrix_to_json(&via_ab),
    });
    compare_oracle(spec, &r_ba, r)
}

fn resolvent_bound(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, seed: u64, r: &mut Report) -> Result<()> {
    let pair = spec.factor_pair(cli.n)?;
    let lambda = require(cli.lambda, "--lambda")?;
    let mu = require(cli.mu, "--mu")?;
    r.arg("lambda", complex_json(lambda));
    r.arg("mu", complex_json(mu));
    r.threshold("domination_starts", products::DOMINATION_STARTS as f64);
    let dom = products::domination_constants(&pair, seed);
    let check = products::resolvent_bound_check(&pair, lambda, mu, &dom, tol.guard)?;
    r.check(check.holds, || format!("resolvent bound fails: {:e} > {:e}", check.lhs, check.rhs));
    r.results = json!({ "domination": to_value(&dom), "bound": to_value(check) });
    Ok(())
}

fn pole_order(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let pair = spec.factor_pair(cli.n)?;
    let p = products::zero_pole_order(&pair, tol)?;
    r.threshold("nonzero_threshold", pair.zero_threshold(tol));
    r.check(p.consistent(), || format!("AB is invertible but the pole of BA at 0 has order {}", p.order_ba));
    r.results = json!({ "pole_order": to_value(p), "consistent": p.consistent() });
    Ok(())
}

fn classify(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let op = spec.operator(cli.n)?;
    let cmp = signtype::product_signtype_compare(&op, tol)?;
    r.threshold("eigenvector_identity", signtype::EIGENVECTOR_IDENTITY_TOL);
    r.threshold("nonzero_threshold", FactorPair::from_operator(&op).zero_threshold(tol));
    r.check(cmp.holds, || "sign types of T[*]T and TT[*] do not correspond".into());
    if !cmp.critical_first.is_empty() {
        r.warnings.push(format!("{} critical point(s) present", cmp.critical_first.len()));
    }
    r.results = to_value(&cmp);
    Ok(())
}

fn critical(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let (a, j) = target_matrix(spec, cli)?;
    r.arg("target", target_name(cli.target));
    r.threshold("selfadjoint", signtype::SELFADJOINT_TOL);
    let classes = signtype::classify_spectrum(&a, &j, tol)?;
    let crit: Vec<f64> = classes
        .iter()
        .filter(|c| c.sign_type == signtype::SignType::Critical)
        .map(|c| c.eigenvalue)
        .collect();
    r.results = json!({ "critical_points": crit, "classifications": to_value(&classes) });
    Ok(())
}

fn projection(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let (a, j) = target_matrix(spec, cli)?;
    let (lo, hi) = (require(cli.lo, "--lo")?, require(cli.hi, "--hi")?);
    if lo >= hi {
        return Err(Error::validation("--lo/--hi", "need lo < hi"));
    }
    r.arg("target", target_name(cli.target));
    r.arg("lo", lo);
    r.arg("hi", hi);
    let p = signtype::interval_spectral_projection(&a, &j, lo, hi, tol)?;
    if krein::is_j_selfadjoint(&a, &j, signtype::SELFADJOINT_TOL)? {
        let allowed = 1e-8 * p.norm.max(1.0);
        r.threshold("projection_selfadjoint_relative", 1e-8);
        r.check(p.adjoint_defect <= allowed, || {
            format!("projection is not J-selfadjoint (defect {:e})", p.adjoint_defect)
        });
    } else {
        r.warnings.push("target is not J-selfadjoint; the projection need not be".into());
    }
    r.results = json!({
        "projector": matrix_to_json(&p.projector),
        "norm": p.norm,
        "inertia_on_range": to_value(p.inertia_on_range),
        "adjoint_defect": p.adjoint_defect,
        "multiplicity": p.multiplicity,
    });
    compare_oracle(spec, &p.projector, r)
}

fn definitize(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, seed: u64, r: &mut Report) -> Result<()> {
    let (a, j) = target_matrix(spec, cli)?;
    r.arg("target", target_name(cli.target));
    r.arg("max_degree", cli.max_degree);
    r.threshold("restarts", signtype::DEFINITIZE_RESTARTS as f64);
    let p = signtype::definitize(&a, &j, cli.max_degree, seed, tol)?;
    let ok = signtype::is_definitizing(&p, &a, &j)?;
    r.check(ok, || "returned polynomial is not definitizing".into());
    r.results = json!({ "polynomial": to_value(&p), "is_definitizing": ok });
    Ok(())
}

fn growth_csv(samples: &[family::ResolventSample]) -> String {
    io::csv("y,resolvent_norm", samples.iter().map(|s| vec![s.y, s.resolvent_norm]))
}

fn growth_fit(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let (a, _) = target_matrix(spec, cli)?;
    let x0 = require(cli.x0, "--x0")?;
    let ys = cli.y_grid()?;
    r.arg("target", target_name(cli.target));
    r.arg("x0", x0);
    r.arg("y", json!({"max": cli.y_max, "min": cli.y_min, "count": cli.y_count}));
    r.threshold("slope_stability", family::SLOPE_STABILITY);
    let fit = family::growth_order_fit(&a, x0, &ys, tol.growth_guard)?;
    if !fit.window_stable {
        r.warnings.push("slopes inside the fitting window are not stable".into());
    }
    r.grid_csv = Some(growth_csv(&fit.samples));
    r.results = to_value(&fit);
    Ok(())
}

fn family_analyze(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, seed: u64, r: &mut Report) -> Result<()> {
    let analysis = require(cli.analysis, "--analysis")?;
    r.arg("analysis", analysis);
    let target = Target::from(cli.target);
    if analysis == Analysis::PartnerGrowth {
        let op = spec.operator(cli.n)?;
        let x0 = require(cli.x0, "--x0")?;
        let ys = cli.y_grid()?;
        r.arg("x0", x0);
        r.arg("y", json!({"max": cli.y_max, "min": cli.y_min, "count": cli.y_count}));
        let rep = family::partner_growth_check(&op, x0, &ys, seed, tol)?;
        r.check(rep.bound_holds, || format!("partner growth bound fails (ratio {:e})", rep.max_bound_ratio));
        r.grid_csv = Some(growth_csv(&rep.fit_first.samples));
        r.results = to_value(&rep);
        return Ok(());
    }
    let fam = spec.family()?;
    r.arg("target", target_name(cli.target));
    r.arg("n_values", &cli.n_values.0);
    r.threshold("bounded_ratio", family::BOUNDED_RATIO);
    r.threshold("growing_ratio", family::GROWING_RATIO);
    let trend = match analysis {
        Analysis::Growth => {
            let x0 = require(cli.x0, "--x0")?;
            r.arg("x0", x0);
            family::growth_trend(fam, x0, &cli.y_grid()?, &cli.n_values.0, target, tol)?
        }
        _ => {
            let intervals = if cli.shrinking {
                r.arg("shrinking", true);
                family::graded_shrinking_intervals(fam, &cli.n_values.0)?
            } else {
                let (lo, hi) = (require(cli.lo, "--lo")?, require(cli.hi, "--hi")?);
                r.arg("lo", lo);
                r.arg("hi", hi);
                Intervals::Fixed { lo, hi }
            };
            if analysis == Analysis::Projection {
                family::projection_trend(fam, &intervals, &cli.n_values.0, target, tol)?
            } else {
                family::negative_rank_trend(fam, &intervals, &cli.n_values.0, target, tol)?
            }
        }
    };
    if trend.verdict == family::Verdict::Inconclusive {
        r.warnings.push("trend verdict is inconclusive".into());
    }
    r.results = to_value(&trend);
    Ok(())
}

fn pseudospectrum(spec: &OperatorSpec, cli: &Cli, tol: &Tolerances, r: &mut Report) -> Result<()> {
    let (a, _) = target_matrix(spec, cli)?;
    let eig = numerics::eigenvalues(&a)?;
    let bound = |f: fn(&Complex64) -> f64, pick: fn(f64, f64) -> f64, start: f64, pad: f64| {
        eig.iter().map(f).fold(start, pick) + pad
    };
    let rect = Rectangle {
        re_min: cli.re_min.unwrap_or_else(|| bound(|z| z.re, f64::min, f64::INFINITY, -1.0)),
        re_max: cli.re_max.unwrap_or_else(|| bound(|z| z.re, f64::max, f64::NEG_INFINITY, 1.0)),
        im_min: cli.im_min.unwrap_or_else(|| bound(|z| z.im, f64::min, f64::INFINITY, -1.0)),
        im_max: cli.im_max.unwrap_or_else(|| bound(|z| z.im, f64::max, f64::NEG_INFINITY, 1.0)),
    };
    if !(rect.re_min < rect.re_max && rect.im_min < rect.im_max) {
        return Err(Error::validation("--re-min/--re-max/--im-min/--im-max", "empty rectangle"));
    }
    r.arg("target", target_name(cli.target));
    r.arg("rectangle", rect);
    r.arg("nx", cli.nx);
    r.arg("ny", cli.ny);
    let grid = numerics::pseudospectrum_grid(&a, &rect, cli.nx, cli.ny)?;
    let smallest = grid.iter().map(|p| p.sigma_min).fold(f64::INFINITY, f64::min);
    r.grid_csv = Some(io::csv("re,im,sigma_min", grid.iter().map(|p| vec![p.re, p.im, p.sigma_min])));
    let es = numerics::eigenstructure(&a, tol)?;
    r.results = json!({
        "points": grid.len(),
        "min_sigma_min": smallest,
        "eigenvalues": to_value(&es.clusters),
    });
    if cli.grid_out.is_none() {
        r.results["grid"] = to_value(&grid);
    }
    Ok(())
}

/// Runs one command on a loaded spec.
pub fn execute(cli: &Cli, spec: &OperatorSpec, seed: u64) -> Result<Report> {
    if spec.oracle.is_some() && !cli.command.accepts_oracle() {
        return Err(Error::validation("oracle", format!("not supported by `{}`", cli.command.name())));
    }
    let tol = cli.tolerances();
    let mut r = Report {
        results: Value::Null,
        ..Report::default()
    };
    if let (Some(n), io::Payload::Family(_)) = (cli.n, &spec.payload) {
        r.arg("n", n);
    }
    match cli.command {
        Command::Adjoint => adjoint(spec, cli, &mut r)?,
        Command::Products => products_cmd(spec, cli, &mut r)?,
        Command::CompareSpectra => compare_spectra(spec, cli, &tol, &mut r)?,
        Command::Transport => transport(spec, cli, &tol, &mut r)?,
        Command::ResolventIdentities => resolvent_identities(spec, cli, &tol, &mut r)?,
        Command::ResolventBound => resolvent_bound(spec, cli, &tol, seed, &mut r)?,
        Command::PoleOrder => pole_order(spec, cli, &tol, &mut r)?,
        Command::Classify => classify(spec, cli, &tol, &mut r)?,
        Command::Critical => critical(spec, cli, &tol, &mut r)?,
        Command::Projection => projection(spec, cli, &tol, &mut r)?,
        Command::Definitize => definitize(spec, cli, &tol, seed, &mut r)?,
        Command::FamilyAnalyze => family_analyze(spec, cli, &tol, seed, &mut r)?,
        Command::GrowthFit => growth_fit(spec, cli, &tol, &mut r)?,
        Command::Pseudospectrum => pseudospectrum(spec, cli, &tol, &mut r)?,
    }
    Ok(r)
}

/// The JSON document for a finished report.
pub fn report_json(cli: &Cli, spec: &OperatorSpec, seed: u64, r: &Report) -> Value {
    json!({
        "command": cli.command.name(),
        "args": r.args,
        "input_digest": spec.digest(),
        "seed": seed,
        "tolerances": to_value(cli.tolerances()),
        "thresholds": r.thresholds,
        "results": r.results,
        "violations": r.violations,
        "warnings": r.warnings,
    })
}

fn error_json(e: &Error) -> String {
    json!({"error": {"kind": e.kind(), "message": e.to_string()}}).to_string()
}

fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::validation(SEED_ENV, format!("expected a nonnegative integer, got `{s}`"))),
        Err(_) => Ok(0),
    }
}

fn run_parsed(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let seed = match cli.seed {
        Some(s) => s,
        None => default_seed()?,
    };
    let spec = io::load_spec(&cli.spec, seed)?;
    let report = execute(cli, &spec, seed)?;
    let mut text = serde_json::to_string_pretty(&report_json(cli, &spec, seed, &report)).expect("report serializes");
    text.push('\n');
    if let (Some(path), Some(csv)) = (&cli.grid_out, &report.grid_csv) {
        io::write_atomic(path, csv.as_bytes())?;
    }
    match &cli.out {
        Some(path) => io::write_atomic(path, text.as_bytes())?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(format!("stdout: {e}")))?,
    }
    Ok(if report.violations.is_empty() { 0 } else { 2 })
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = Error::validation("usage", e.render().to_string().trim_end());
            let _ = writeln!(stderr, "{}", error_json(&err));
            return 1;
        }
    };
    match run_parsed(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_json(&e));
            1
        }
    }
}

/// Runs the CLI on the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
