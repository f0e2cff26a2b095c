//! First-order comb model against the full solver for a thin sample.
//!
//! `cargo run --release --example analytic_model`

use nfs_comb::runner::{analytic, compare, simulate};
use nfs_comb::{Result, RunConfig};

fn main() -> Result<()> {
    for scheme in ["regular", "inverted"] {
        let cfg = RunConfig::with_overrides(&[format!("switching.scheme={scheme}"), "physics.xi=0.1".into()])?;
        let model = analytic(&cfg)?;
        let sim = simulate(&cfg)?;
        let t0 = sim.run.sequence.t0();
        let report = compare(&sim.propagation.field, &model.field, Some((t0, t0 + 705.0)), 0.05)?;

        println!("{scheme}: relative L2 {:.2}% over [{:.1}, {:.1}] ns", 100.0 * report.relative_l2, report.window.0, report.window.1);
        println!("  predicted teeth in [-0.6, 0.6]: {:.4?}", model.params.tooth_positions(-0.6, 0.6));
        for p in &report.peaks {
            println!(
                "  {:+.5} (model) {:+.5} (solver)  height diff {:+.1}%",
                p.analytic_position,
                p.numeric_position,
                100.0 * p.relative_height_delta
            );
        }
    }
    Ok(())
}
