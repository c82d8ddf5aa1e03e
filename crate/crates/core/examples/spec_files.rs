//! Loading operator specs and running a command in-process.
//!
//! Run with `cargo run --example spec_files`.

use kreinlab::cli::run_with;
use kreinlab::io::parse_spec;

fn main() -> kreinlab::Result<()> {
    let spec = parse_spec(r#"{"J": {"signature": [1, -1]}, "T": [[0, 2], [1, 0]]}"#, 0)?;
    println!("normalized: {}", spec.normalized());
    println!("digest:     {}", spec.digest());

    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/canonical_pair.json");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(["kreinlab", "pole-order", fixture], &mut out, &mut err);
    println!("exit code {code}");
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
