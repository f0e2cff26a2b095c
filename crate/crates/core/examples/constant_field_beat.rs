//! Quantum beat of a magnetized sample and the zero-field decay.
//!
//! `cargo run --release --example constant_field_beat`

use nfs_comb::physics::{beat_quantities, PhysicsModel, GAMMA_57FE};
use nfs_comb::runner::{analyse, simulate};
use nfs_comb::spectrum::fit_decay_rate;
use nfs_comb::{Result, RunConfig};

fn main() -> Result<()> {
    let beat = beat_quantities(&PhysicsModel::default(), 34.4)?;
    println!(
        "B = 34.4 T: splitting {:.4} rad/ns, beat period {:.3} ns",
        beat.delta_b, beat.t_qb
    );

    let sim = simulate(&RunConfig::default())?;
    let a = analyse(&sim.propagation.field, &sim.run)?;
    println!("t0 = {:.3} ns, resolution {:.2e} rad/ns", sim.run.sequence.t0(), a.spectrum.resolution);
    for p in &a.metrics.peaks {
        println!("  peak at {:+.5} rad/ns, fwhm {:?}", p.position, p.fwhm);
    }
    if let [lo, .., hi] = a.metrics.peaks.as_slice() {
        println!("separation {:.5} rad/ns", hi.position - lo.position);
    }

    let zero = simulate(&RunConfig::with_overrides(&["physics.b0=0.0".into(), "physics.xi=0.25".into()])?)?;
    let t0 = zero.run.sequence.t0();
    let rate = fit_decay_rate(&zero.propagation.field, t0, t0 + 5.0 / GAMMA_57FE)?;
    println!("B = 0, xi = 0.25: intensity decays at {:.4} x natural rate", rate / GAMMA_57FE);
    Ok(())
}
