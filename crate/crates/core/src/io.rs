//! Output layout and provenance.
//!
//! Every run writes into its own directory with fixed file names. Each file
//! carries the SHA-256 of the resolved configuration, either as a `#` comment
//! line (CSV) or as a `config_hash` field (JSON).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::Result;
use crate::record::FieldRecord;
use crate::spectrum::SpectrumRecord;

pub const FIELD_FILE: &str = "field.csv";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const CONFIG_FILE: &str = "config.json";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SEQUENCE_FILE: &str = "sequence.csv";

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "NFS_COMB_OUT";

/// Output root: `$NFS_COMB_OUT` if set, else `./runs`.
pub fn default_output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Canonical JSON of a resolved configuration (output location excluded).
pub fn canonical_json(cfg: &RunConfig) -> Result<String> {
    let mut c = cfg.clone();
    c.output_dir = None;
    Ok(serde_json::to_string_pretty(&c)? + "\n")
}

/// Hex SHA-256 of [`canonical_json`].
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let digest = Sha256::digest(canonical_json(cfg)?.as_bytes());
    Ok(hex::encode(digest))
}

pub fn provenance_comments(hash: &str, extra: &[String]) -> Vec<String> {
    let mut out = vec![format!("config_hash: {hash}")];
    out.extend(extra.iter().cloned());
    out
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_field(path: &Path, field: &FieldRecord, comments: &[String]) -> Result<()> {
    let mut w = create(path)?;
    field.write_csv(&mut w, comments)?;
    w.flush()?;
    Ok(())
}

pub fn write_spectrum(path: &Path, spec: &SpectrumRecord, comments: &[String]) -> Result<()> {
    let mut w = create(path)?;
    spec.write_csv(&mut w, comments)?;
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_config(dir: &Path, cfg: &RunConfig) -> Result<()> {
    let mut w = create(&dir.join(CONFIG_FILE))?;
    w.write_all(canonical_json(cfg)?.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldRecord> {
    FieldRecord::read_csv(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::default();
        let b = RunConfig {
            output_dir: Some("elsewhere".into()),
            ..RunConfig::default()
        };
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
        let c = RunConfig::with_overrides(&["physics.xi=0.1".into()]).unwrap();
        assert_ne!(config_hash(&a).unwrap(), config_hash(&c).unwrap());
    }
}
