//! Jittering the storage time washes the comb out.
//!
//! `cargo run --release --example randomized_comb`

use nfs_comb::runner::{analyse, simulate, JITTER_SEEDS};
use nfs_comb::{Result, RunConfig};

fn main() -> Result<()> {
    let mut runs = vec![("periodic".to_string(), vec!["switching.scheme=regular".to_string()])];
    for (jitter, seed) in [(0.2, JITTER_SEEDS[0]), (0.3, JITTER_SEEDS[1])] {
        runs.push((
            format!("jitter {:.0}%", 100.0 * jitter),
            vec![
                "switching.scheme=regular-randomized".into(),
                format!("switching.jitter_fraction={jitter}"),
                format!("seed={seed}"),
            ],
        ));
    }
    println!("{:>11} {:>12} {:>14} {:>9}", "", "period std", "spacing std", "contrast");
    for (label, o) in runs {
        let sim = simulate(&RunConfig::with_overrides(&o)?)?;
        let m = analyse(&sim.propagation.field, &sim.run)?.metrics;
        println!(
            "{label:>11} {:>9.3} ns {:>13.2}% {:>9.1}",
            m.repetition_period_std.unwrap_or(f64::NAN),
            100.0 * m.spacing_rel_std.unwrap_or(f64::NAN),
            m.peak_contrast.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
