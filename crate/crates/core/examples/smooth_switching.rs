//! Smoothed and sinusoidal switching compared with the stepwise scheme.
//!
//! `cargo run --release --example smooth_switching`

use nfs_comb::runner::{analyse, resolve, sequence_samples, simulate};
use nfs_comb::{Result, RunConfig};

fn main() -> Result<()> {
    let schemes: [(&str, &[&str]); 4] = [
        ("regular", &["switching.scheme=regular"]),
        ("smoothed 0.5", &["switching.scheme=regular-smoothed", "switching.epsilon=0.5"]),
        ("smoothed 0.1", &["switching.scheme=regular-smoothed", "switching.epsilon=0.1"]),
        ("sinusoidal", &["switching.scheme=sinusoidal"]),
    ];
    for (label, o) in schemes {
        let cfg = RunConfig::with_overrides(&o.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;

        let run = resolve(&cfg, None)?;
        let f: Vec<String> = sequence_samples(&run, Some(2.0), Some(run.sequence.t0() + 30.0))?
            .iter()
            .rev()
            .take(15)
            .rev()
            .map(|(_, f)| format!("{f:+.2}"))
            .collect();
        println!("{label}: f(t) over one on window {}", f.join(" "));

        let sim = simulate(&cfg)?;
        let a = analyse(&sim.propagation.field, &sim.run)?;
        let teeth: Vec<String> = a.metrics.peaks.iter().map(|p| format!("{:+.4}", p.position)).collect();
        println!("  teeth {}", teeth.join(" "));
    }
    Ok(())
}
