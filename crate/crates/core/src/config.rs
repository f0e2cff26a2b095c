//! Run configuration: a TOML file with one section per module.
//!
//! ```toml
//! seed = 7
//!
//! [physics]
//! b0 = 34.4
//! xi = 0.5
//!
//! [pulse]
//! area = 0.01
//! t_delay = 10.0
//!
//! [switching]
//! scheme = "regular"
//! t0 = "auto"
//! t_on = "0.5 tqb"
//! t_off = "1 tqb"
//!
//! [solver]
//! dt = "auto"
//!
//! [spectrum]
//! zero_pad = 4
//! ```
//!
//! Times accept a number of ns, `"<x> ns"`, `"<x> tqb"` (multiples of the
//! beat period at `b0`) or `"auto"` where a default is derived. A resolved
//! configuration holds plain numbers only and is what gets written next to
//! the outputs; it loads back through the same path.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::analytic::Truncation;
use crate::error::{Error, Result};
use crate::mbe::{Integrator, PulseShape, SolverMode, DEFAULT_T_MAX};
use crate::physics::PhysicsModel;
use crate::spectrum::DEFAULT_REL_THRESHOLD;
use crate::switching::Scheme;

/// A time value that may depend on the beat period or be derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Time {
    Auto,
    Ns(f64),
    BeatPeriods(f64),
}

impl Time {
    /// Value in ns; `None` for `Auto`.
    pub fn resolve(self, t_qb: Option<f64>) -> Result<Option<f64>> {
        match self {
            Time::Auto => Ok(None),
            Time::Ns(v) => Ok(Some(v)),
            Time::BeatPeriods(k) => t_qb
                .map(|t| Some(k * t))
                .ok_or_else(|| Error::config("times in tqb need a nonzero field b0")),
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Auto => write!(f, "auto"),
            Time::Ns(v) => write!(f, "{v}"),
            Time::BeatPeriods(k) => write!(f, "{k} tqb"),
        }
    }
}

impl std::str::FromStr for Time {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Time::Auto);
        }
        let lower = s.to_ascii_lowercase();
        let (num, unit) = match lower.find(|c: char| c.is_ascii_alphabetic() && c != 'e') {
            Some(i) => (lower[..i].trim(), lower[i..].trim()),
            None => (lower.as_str(), ""),
        };
        let v: f64 = num
            .parse()
            .map_err(|_| Error::config(format!("cannot read time {s:?}")))?;
        match unit {
            "" | "ns" => Ok(Time::Ns(v)),
            "tqb" | "t_qb" => Ok(Time::BeatPeriods(v)),
            _ => Err(Error::config(format!("unknown time unit in {s:?} (use ns or tqb)"))),
        }
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Time::Ns(v) => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Time::Ns(v as f64)),
            Raw::Num(v) => Ok(Time::Ns(v)),
            Raw::Text(t) => t.parse().map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    /// Operating field, tesla.
    pub b0: f64,
    pub gamma: f64,
    pub b_ref: f64,
    pub delta_b_ref: f64,
    pub xi: f64,
    pub length: f64,
    pub c32: f64,
    pub c41: f64,
    pub sign32: f64,
    pub sign41: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let m = PhysicsModel::default();
        PhysicsSection {
            b0: m.b_ref,
            gamma: m.gamma,
            b_ref: m.b_ref,
            delta_b_ref: m.delta_b_ref,
            xi: m.xi,
            length: m.length,
            c32: m.c32,
            c41: m.c41,
            sign32: m.sign32,
            sign41: m.sign41,
        }
    }
}

impl PhysicsSection {
    pub fn model(&self) -> PhysicsModel {
        PhysicsModel {
            gamma: self.gamma,
            b_ref: self.b_ref,
            delta_b_ref: self.delta_b_ref,
            xi: self.xi,
            length: self.length,
            c32: self.c32,
            c41: self.c41,
            sign32: self.sign32,
            sign41: self.sign41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub shape: PulseShape,
    /// Pulse area, rad. Exclusive with `amplitude`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    /// Peak Rabi frequency, rad/ns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    pub t_delay: f64,
    pub tau: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection {
            shape: PulseShape::Gaussian,
            area: None,
            amplitude: None,
            t_delay: 10.0,
            tau: 1.0,
        }
    }
}

/// Pulse area used when neither area nor amplitude is given.
pub const DEFAULT_PULSE_AREA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchingSection {
    pub scheme: Scheme,
    /// First switch-off; `auto` places it on the first beat minimum.
    pub t0: Time,
    pub t_on: Time,
    pub t_off: Time,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter_fraction: Option<f64>,
}

impl Default for SwitchingSection {
    fn default() -> Self {
        SwitchingSection {
            scheme: Scheme::Constant,
            t0: Time::Auto,
            t_on: Time::BeatPeriods(0.5),
            t_off: Time::BeatPeriods(0.5),
            epsilon: None,
            jitter_fraction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub n_slices: usize,
    /// `auto` = min(T_QB / 400, tau / 20).
    pub dt: Time,
    pub t_max: f64,
    pub mode: SolverMode,
    pub integrator: Integrator,
    /// Repeat the run with doubled slices and halved dt and report the change.
    pub check_convergence: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            n_slices: 8,
            dt: Time::Auto,
            t_max: DEFAULT_T_MAX,
            mode: SolverMode::Linear,
            integrator: Integrator::Rk4,
            check_convergence: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// `auto` = t0.
    pub t_start: Time,
    /// `auto` = end of the record.
    pub t_end: Time,
    pub rel_threshold: f64,
    /// Zero padding used for peak positions; the written spectrum is unpadded.
    pub zero_pad: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            t_start: Time::Auto,
            t_end: Time::Auto,
            rel_threshold: DEFAULT_REL_THRESHOLD,
            zero_pad: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyticSection {
    pub truncation: Truncation,
    /// Half-width of the frequency grid, rad/ns.
    pub omega_max: f64,
    pub amplitude: f64,
}

impl Default for AnalyticSection {
    fn default() -> Self {
        AnalyticSection {
            truncation: Truncation::Auto,
            omega_max: 0.8,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    TOff,
    TOn,
    Xi,
    B0,
    Epsilon,
    JitterFraction,
    Seed,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::TOff => "t_off",
            SweepParameter::TOn => "t_on",
            SweepParameter::Xi => "xi",
            SweepParameter::B0 => "b0",
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::JitterFraction => "jitter_fraction",
            SweepParameter::Seed => "seed",
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::config(format!("unknown sweep parameter {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// Where outputs go; not part of the resolved configuration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Seed of the randomized scheme.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub physics: PhysicsSection,
    pub pulse: PulseSection,
    pub switching: SwitchingSection,
    pub solver: SolverSection,
    pub spectrum: SpectrumSection,
    pub analytic: AnalyticSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    /// Load a TOML file, or JSON when the extension is `.json`, then apply
    /// `overrides` of the form `section.key=value` (value in TOML syntax).
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let table = if path.extension().is_some_and(|e| e == "json") {
            let json: serde_json::Value = serde_json::from_str(&text)?;
            toml::Table::try_from(json).map_err(|e| Error::config(e.to_string()))?
        } else {
            text.parse::<toml::Table>()
                .map_err(|e| Error::config(format!("{}: {e}", path.display())))?
        };
        Self::from_table(table, overrides)
    }

    /// Defaults with `overrides` applied.
    pub fn with_overrides(overrides: &[String]) -> Result<Self> {
        Self::from_table(toml::Table::new(), overrides)
    }

    /// Apply `overrides` on top of this configuration.
    pub fn overridden(&self, overrides: &[String]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let table = toml::Table::try_from(self).map_err(|e| Error::config(e.to_string()))?;
        Self::from_table(table, overrides)
    }

    fn from_table(mut table: toml::Table, overrides: &[String]) -> Result<Self> {
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override {spec:?} is not key=value")))?;
    let value = parse_value(raw.trim())?;
    let path: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = path.split_last().expect("split yields one part");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("{key}: {p} is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// A TOML literal, or a bare string when it does not parse as one.
fn parse_value(raw: &str) -> Result<toml::Value> {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => Ok(t.remove("v").expect("key v was just written")),
        Err(_) => Ok(toml::Value::String(raw.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times_parse() {
        assert_eq!("auto".parse::<Time>().unwrap(), Time::Auto);
        assert_eq!("12.5".parse::<Time>().unwrap(), Time::Ns(12.5));
        assert_eq!("12.5 ns".parse::<Time>().unwrap(), Time::Ns(12.5));
        assert_eq!("0.5 tqb".parse::<Time>().unwrap(), Time::BeatPeriods(0.5));
        assert_eq!("1.5e0tqb".parse::<Time>().unwrap(), Time::BeatPeriods(1.5));
        assert!("3 ms".parse::<Time>().is_err());
        assert!("x".parse::<Time>().is_err());
        assert_eq!(Time::BeatPeriods(2.0).resolve(Some(3.0)).unwrap(), Some(6.0));
        assert!(Time::BeatPeriods(2.0).resolve(None).is_err());
    }

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn sections_and_units() {
        let cfg = RunConfig::from_toml_str(
            r#"
            seed = 3
            [physics]
            xi = 0.1
            [switching]
            scheme = "regular-randomized"
            t_off = "1 tqb"
            t0 = 16.7
            jitter_fraction = 0.3
            [solver]
            integrator = { kind = "adaptive", abs_tol = 1e-9, rel_tol = 1e-7 }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.physics.xi, 0.1);
        assert_eq!(cfg.switching.scheme, Scheme::RegularRandomized);
        assert_eq!(cfg.switching.t_off, Time::BeatPeriods(1.0));
        assert_eq!(cfg.switching.t0, Time::Ns(16.7));
        assert!(matches!(cfg.solver.integrator, Integrator::Adaptive { .. }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("[physics]\nxii = 0.1").is_err());
        assert!(RunConfig::from_toml_str("colour = 1").is_err());
        assert!(RunConfig::from_toml_str("[switching]\nscheme = \"zigzag\"").is_err());
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::with_overrides(&[
            "physics.xi=0.25".into(),
            "switching.scheme=regular".into(),
            "switching.t_off=\"1.5 tqb\"".into(),
            "seed=9".into(),
        ])
        .unwrap();
        assert_eq!(cfg.physics.xi, 0.25);
        assert_eq!(cfg.switching.scheme, Scheme::Regular);
        assert_eq!(cfg.switching.t_off, Time::BeatPeriods(1.5));
        assert_eq!(cfg.seed, Some(9));
        assert!(RunConfig::with_overrides(&["physics.bogus=1".into()]).is_err());
        assert!(RunConfig::with_overrides(&["noequals".into()]).is_err());
        let again = cfg.overridden(&["physics.xi=0.5".into()]).unwrap();
        assert_eq!(again.physics.xi, 0.5);
        assert_eq!(again.switching.t_off, Time::BeatPeriods(1.5));
    }

    #[test]
    fn json_sidecar_loads() {
        let cfg = RunConfig::with_overrides(&["switching.scheme=inverted".into()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        assert_eq!(RunConfig::load(&path, &[]).unwrap(), cfg);
    }
}
