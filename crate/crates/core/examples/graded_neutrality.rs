//! Projection norms over intervals shrinking to zero grow with the
//! eigenvector conditioning `kappa(n) = 2^n`.
//!
//! Run with `cargo run --example graded_neutrality`.

use kreinlab::family::{graded_shrinking_intervals, projection_trend, BlockFamily, ConditioningRule, SequenceRule, Target};
use kreinlab::numerics::Tolerances;

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let family = BlockFamily::graded_neutrality(SequenceRule::Power(2.0), ConditioningRule::Exponential(2.0), 0)?;
    let ns = [4, 8, 12, 16];
    let intervals = graded_shrinking_intervals(&family, &ns)?;
    let trend = projection_trend(&family, &intervals, &ns, Target::First, &tol)?;
    for ((n, v), (lo, hi)) in ns.iter().zip(&trend.values).zip(&trend.intervals) {
        println!("N = {n:>2}  interval ({lo:+.3e}, {hi:.3e})  |E| = {v:.3}");
    }
    println!("verdict: {:?}", trend.verdict);

    let flat = BlockFamily::graded_neutrality(SequenceRule::Power(2.0), ConditioningRule::Constant(1.0), 0)?;
    let intervals = graded_shrinking_intervals(&flat, &ns)?;
    let trend = projection_trend(&flat, &intervals, &ns, Target::First, &tol)?;
    println!("kappa = 1: {:?} -> {:?}", trend.values, trend.verdict);
    Ok(())
}
