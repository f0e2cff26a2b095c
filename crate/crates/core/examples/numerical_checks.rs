//! Grid convergence and density-matrix bookkeeping of the solver.
//!
//! `cargo run --release --example numerical_checks`

use nfs_comb::runner::simulate;
use nfs_comb::{Result, RunConfig};

fn main() -> Result<()> {
    let cfg = RunConfig::with_overrides(&["switching.scheme=regular".into(), "solver.check_convergence=true".into()])?;
    let sim = simulate(&cfg)?;
    let c = sim.convergence.expect("requested");
    println!(
        "dt = {:.4} ns, {} slices: doubling slices changes the output by {:.1e}, halving dt by {:.1e}",
        sim.run.solver.dt, sim.run.solver.n_slices, c.slice_change, c.dt_change
    );

    let full = RunConfig::with_overrides(&[
        "switching.scheme=inverted".into(),
        "solver.mode=\"full\"".into(),
        "pulse.area=0.5".into(),
    ])?;
    let d = simulate(&full)?.propagation.diagnostics;
    println!(
        "full density matrix, pulse area {:.2}: trace error {:.1e}, hermiticity {:.1e}, hyperfine coherence {:.1e}",
        d.pulse_area, d.max_trace_error, d.max_hermiticity_error, d.max_hyperfine_coherence
    );
    println!("populations stay in [{:.3e}, {:.6}]", d.min_population, d.max_population);
    Ok(())
}
