//! Tooth spacing against storage time, next to 2 pi / (t_on + t_off).
//!
//! `cargo run --release --example spacing_sweep [output-dir]`
//!
//! With an output directory the runs and `summary.csv` are written there.

use nfs_comb::config::SweepParameter;
use nfs_comb::runner::{analyse, run_sweep, simulate, with_sweep_value};
use nfs_comb::{Result, RunConfig};
use serde_json::json;

fn main() -> Result<()> {
    let base = RunConfig::with_overrides(&["switching.scheme=regular".into()])?;
    let values: Vec<_> = ["0.5 tqb", "1 tqb", "1.5 tqb", "2 tqb"].iter().map(|v| json!(v)).collect();

    if let Some(dir) = std::env::args().nth(1) {
        for row in run_sweep(&base, SweepParameter::TOff, &values, dir.as_ref(), None)? {
            println!("{:>8}: {:?} vs {:?}", row.value, row.delta_f_measured, row.delta_f_predicted);
        }
        return Ok(());
    }

    println!("{:>8} {:>10} {:>10} {:>9} {:>9}", "t_off", "measured", "predicted", "error", "rel std");
    for v in &values {
        let cfg = with_sweep_value(&base, SweepParameter::TOff, v)?;
        let sim = simulate(&cfg)?;
        let a = analyse(&sim.propagation.field, &sim.run)?;
        let predicted = sim.run.predicted_spacing().unwrap();
        let measured = a.metrics.mean_spacing.unwrap_or(f64::NAN);
        println!(
            "{:>8} {measured:>10.5} {predicted:>10.5} {:>8.3}% {:>8.3}%",
            v.as_str().unwrap(),
            100.0 * (measured / predicted - 1.0),
            100.0 * a.metrics.spacing_rel_std.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
