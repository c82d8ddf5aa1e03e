//! `sigma_min(A - z)` on a grid, written as CSV to stdout.
//!
//! Run with `cargo run --example pseudospectrum > grid.csv`.

use kreinlab::io::csv;
use kreinlab::numerics::{from_real, pseudospectrum_grid, Rectangle};

fn main() -> kreinlab::Result<()> {
    let a = from_real(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0]);
    let rect = Rectangle { re_min: -2.0, re_max: 1.0, im_min: -1.0, im_max: 1.0 };
    let grid = pseudospectrum_grid(&a, &rect, 31, 21)?;
    print!("{}", csv("re,im,sigma_min", grid.iter().map(|p| vec![p.re, p.im, p.sigma_min])));
    Ok(())
}
