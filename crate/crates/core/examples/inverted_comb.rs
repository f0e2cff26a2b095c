//! Reversing the field direction on alternate windows moves every tooth by
//! half a spacing.
//!
//! `cargo run --release --example inverted_comb`

use nfs_comb::runner::{analyse, simulate};
use nfs_comb::{Result, RunConfig};

fn teeth(scheme: &str) -> Result<Vec<(f64, f64)>> {
    let sim = simulate(&RunConfig::with_overrides(&[format!("switching.scheme={scheme}")])?)?;
    let a = analyse(&sim.propagation.field, &sim.run)?;
    Ok(a.metrics.peaks.iter().map(|p| (p.position, p.height)).collect())
}

fn main() -> Result<()> {
    for scheme in ["regular", "inverted"] {
        let t = teeth(scheme)?;
        let top = t.iter().cloned().fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        println!("{scheme}: tallest tooth at {:+.5} rad/ns", top.0);
        for (w, h) in t {
            println!("  {w:+.5} rad/ns  {:.3}", h / top.1);
        }
    }
    Ok(())
}
