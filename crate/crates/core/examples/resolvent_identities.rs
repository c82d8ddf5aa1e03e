//! `(BA - l)^{-1}` recovered from `(AB - l)^{-1}`, and the resolvent bound
//! with domination constants.
//!
//! Run with `cargo run --example resolvent_identities`.

use kreinlab::numerics::{c64, from_real};
use kreinlab::products::{domination_constants, resolvent_bound_check, resolvent_identity_residuals, resolvent_via_ab, FactorPair};

fn main() -> kreinlab::Result<()> {
    let pair = FactorPair::new(from_real(1, 2, &[1.0, 0.0]), from_real(2, 1, &[1.0, 0.0]))?;
    let lambda = c64(2.0, 0.0);
    println!("(BA - 2)^-1 via AB = {}", resolvent_via_ab(&pair, lambda, 1e-12)?);

    let mu = c64(-1.0, 0.5);
    let r = resolvent_identity_residuals(&pair, lambda, mu, 1e-12)?;
    println!("residuals: single {:.1e}, two-parameter {:.1e}", r.residual_ppp, r.residual_two_param);

    let dom = domination_constants(&pair, 0);
    println!("c1 = {:.6}, c2 = {:.6}, C = {}", dom.c1, dom.c2, dom.constant);
    let b = resolvent_bound_check(&pair, c64(0.3, 0.4), mu, &dom, 1e-12)?;
    println!("|(BA - l)^-1| = {:.4} <= {:.4}: {}", b.lhs, b.rhs, b.holds);
    Ok(())
}
