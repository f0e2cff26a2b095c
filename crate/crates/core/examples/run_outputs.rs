//! Load a TOML run file, write the standard output directory and rerun it
//! from the JSON sidecar.
//!
//! `cargo run --release --example run_outputs [output-dir]`

use std::fs;
use std::path::PathBuf;

use nfs_comb::runner::run_spectrum;
use nfs_comb::{io, Result, RunConfig};

const RUN: &str = r#"
[physics]
xi = 0.5

[switching]
scheme = "regular"
t_off = "1 tqb"

[solver]
t_max = 1200.0
"#;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| io::default_output_root().join("example"));
    let cfg = RunConfig::from_toml_str(RUN)?;
    let r = run_spectrum(&cfg, &dir)?;
    println!("config hash {}", io::config_hash(&cfg)?);
    println!("{} peaks, spacing {:?}", r.analysis.metrics.peaks.len(), r.analysis.metrics.mean_spacing);

    let again = dir.join("rerun");
    run_spectrum(&RunConfig::load(&dir.join(io::CONFIG_FILE), &[])?, &again)?;
    for f in [io::FIELD_FILE, io::SPECTRUM_FILE, io::METRICS_FILE] {
        let same = fs::read(dir.join(f))? == fs::read(again.join(f))?;
        println!("{f}: rerun identical = {same}");
    }
    Ok(())
}
