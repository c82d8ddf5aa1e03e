//! Truncations of the family `T = (+) n^{-1} U_n` on `(+) J0`: every
//! eigenvalue `n^{-2}` is critical, projection norms stay bounded and the
//! negative rank over a fixed interval is constant.
//!
//! Run with `cargo run --example example_one_family`.

use kreinlab::family::{negative_rank_trend, projection_trend, truncate, BlockFamily, Intervals, SequenceRule, Target};
use kreinlab::numerics::Tolerances;
use kreinlab::signtype::product_signtype_compare;

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let family = BlockFamily::example_one(SequenceRule::Power(1.0), true, 7)?;
    let ns = [4, 8, 16, 32];
    for &n in &ns {
        let r = product_signtype_compare(&truncate(&family, n)?, &tol)?;
        println!("N = {n:>2}: critical points {} / {}, holds {}", r.critical_first.len(), r.first.len(), r.holds);
    }
    let delta = Intervals::Fixed { lo: 0.05, hi: 1.1 };
    let p = projection_trend(&family, &delta, &ns, Target::First, &tol)?;
    println!("|E_N([0.05, 1.1])| = {:?} -> {:?}", p.values, p.verdict);
    let k = negative_rank_trend(&family, &delta, &ns, Target::First, &tol)?;
    println!("negative rank       = {:?} -> {:?}", k.values, k.verdict);
    Ok(())
}
