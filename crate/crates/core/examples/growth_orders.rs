//! Resolvent growth orders near real points, and the bound they imply for
//! the partner product.
//!
//! Run with `cargo run --example growth_orders`.

use kreinlab::family::{default_y_grid, growth_order_fit, partner_growth_check, truncate, BlockFamily, FamilyKind, ProductParams};
use kreinlab::numerics::{diag_real, from_real, Tolerances};

fn main() -> kreinlab::Result<()> {
    let tol = Tolerances::default();
    let ys = default_y_grid();

    let normal = diag_real(&[0.5, 0.5]);
    let jordan = from_real(2, 2, &[0.5, 1.0, 0.0, 0.5]);
    for (name, a) in [("diag(0.5, 0.5)", normal), ("Jordan block at 0.5", jordan)] {
        let f = growth_order_fit(&a, 0.5, &ys, tol.growth_guard)?;
        println!("{name:<20} m_hat {:.4}  m {}  M_hat {:.3}  window {:.1e}..{:.1e}", f.m_hat, f.m, f.big_m_hat, f.window.0, f.window.1);
    }

    let family = BlockFamily::new(
        FamilyKind::ProductOfBlocks(ProductParams { block_size: 2, decay: 0.5, planted: Some(-0.7) }),
        3,
    )?;
    let op = truncate(&family, 3)?;
    let r = partner_growth_check(&op, -0.7, &ys, 3, &tol)?;
    println!(
        "planted family at -0.7: m_hat(T[*]T) {:.3}, m_hat(TT[*]) {:.3}, order {} bound holds {} (max ratio {:.1e})",
        r.m_hat_first, r.m_hat_second, r.bound_order, r.bound_holds, r.max_bound_ratio
    );
    Ok(())
}
