//! Predefined runs reproducing the published figures.

use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use super::{dump_sequence, run_spectrum, run_sweep};
use crate::config::{RunConfig, SweepParameter};
use crate::error::{Error, Result};
use crate::io;

pub const SCENARIO_IDS: &[&str] = &[
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7a", "fig7b", "fig8", "fig9",
];

/// Seeds of the randomized storage-time runs.
pub const JITTER_SEEDS: [u64; 2] = [20, 30];

#[derive(Debug, Clone)]
pub enum ScenarioTask {
    Spectrum(RunConfig),
    Sweep {
        config: RunConfig,
        parameter: SweepParameter,
        values: Vec<serde_json::Value>,
    },
    Sequence {
        config: RunConfig,
        t_end: f64,
    },
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub label: String,
    pub task: ScenarioTask,
}

fn config(id: &str, overrides: &[&str]) -> RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let mut c = RunConfig::with_overrides(&o).expect("scenario overrides are valid");
    c.scenario = Some(id.to_string());
    c
}

fn spectrum(label: &str, c: RunConfig) -> ScenarioRun {
    ScenarioRun {
        label: label.into(),
        task: ScenarioTask::Spectrum(c),
    }
}

fn storage_sweep(id: &str, scheme: &str, values: &[&str]) -> ScenarioRun {
    ScenarioRun {
        label: format!("{scheme}-t_off"),
        task: ScenarioTask::Sweep {
            config: config(id, &[&format!("switching.scheme={scheme}")]),
            parameter: SweepParameter::TOff,
            values: values.iter().map(|v| json!(v)).collect(),
        },
    }
}

/// Runs making up scenario `id`.
pub fn scenario(id: &str) -> Result<Vec<ScenarioRun>> {
    let constant = |id: &str| spectrum("constant", config(id, &[]));
    let zero = |id: &str| spectrum("zero-field", config(id, &["physics.b0=0.0", "physics.xi=0.25"]));
    let regular = |id: &str| spectrum("regular", config(id, &["switching.scheme=regular"]));
    Ok(match id {
        "fig2" => vec![constant(id), zero(id)],
        "fig3" => vec![regular(id), constant(id), zero(id)],
        "fig4" => vec![storage_sweep(id, "regular", &["0.5 tqb", "1 tqb", "1.5 tqb", "2 tqb"])],
        "fig5" => vec![
            regular(id),
            spectrum("inverted", config(id, &["switching.scheme=inverted"])),
        ],
        "fig6" => vec![storage_sweep(id, "inverted", &["0.5 tqb", "1 tqb", "1.5 tqb", "2 tqb"])],
        "fig7a" => vec![storage_sweep(
            id,
            "regular",
            &["0.5 tqb", "0.75 tqb", "1 tqb", "1.25 tqb", "1.5 tqb", "1.75 tqb", "2 tqb"],
        )],
        "fig7b" => {
            let mut runs = vec![regular(id)];
            for (jitter, seed) in [(0.2, JITTER_SEEDS[0]), (0.3, JITTER_SEEDS[1])] {
                runs.push(spectrum(
                    &format!("jitter-{}", (jitter * 100.0) as u32),
                    config(
                        id,
                        &[
                            "switching.scheme=regular-randomized",
                            &format!("switching.jitter_fraction={jitter}"),
                            &format!("seed={seed}"),
                        ],
                    ),
                ));
            }
            runs
        }
        "fig8" => {
            let seq = |label: &str, o: &[&str]| ScenarioRun {
                label: label.into(),
                task: ScenarioTask::Sequence {
                    config: config(id, o),
                    t_end: 200.0,
                },
            };
            vec![
                seq("regular", &["switching.scheme=regular"]),
                seq("smoothed-0.5", &["switching.scheme=regular-smoothed", "switching.epsilon=0.5"]),
                seq("sinusoidal", &["switching.scheme=sinusoidal"]),
                seq("smoothed-0.1", &["switching.scheme=regular-smoothed", "switching.epsilon=0.1"]),
                seq("smoothed-0.01", &["switching.scheme=regular-smoothed", "switching.epsilon=0.01"]),
            ]
        }
        "fig9" => vec![
            constant(id),
            regular(id),
            spectrum(
                "smoothed",
                config(id, &["switching.scheme=regular-smoothed", "switching.epsilon=0.5"]),
            ),
            spectrum("sinusoidal", config(id, &["switching.scheme=sinusoidal"])),
        ],
        other => {
            return Err(Error::invalid(format!(
                "unknown scenario {other:?}; known: {}",
                SCENARIO_IDS.join(", ")
            )))
        }
    })
}

/// Run scenario `id` into `<root>/<id>/<label>/`.
pub fn run_scenario(id: &str, root: &Path, jobs: Option<usize>) -> Result<()> {
    let dir = root.join(id);
    let runs = scenario(id)?;
    let exec = |r: &ScenarioRun| -> Result<()> {
        let sub = dir.join(&r.label);
        match &r.task {
            ScenarioTask::Spectrum(c) => run_spectrum(c, &sub).map(|_| ()),
            ScenarioTask::Sweep {
                config,
                parameter,
                values,
            } => run_sweep(config, *parameter, values, &sub, jobs).map(|_| ()),
            ScenarioTask::Sequence { config, t_end } => {
                dump_sequence(config, &sub.join(io::SEQUENCE_FILE), None, Some(*t_end)).map(|_| ())
            }
        }
    };
    runs.par_iter().map(exec).collect::<Vec<_>>().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_scenario_resolves() {
        for id in SCENARIO_IDS {
            let runs = scenario(id).unwrap();
            assert!(!runs.is_empty());
            for r in runs {
                let c = match &r.task {
                    ScenarioTask::Spectrum(c) | ScenarioTask::Sequence { config: c, .. } => c.clone(),
                    ScenarioTask::Sweep { config, parameter, values } => {
                        super::super::with_sweep_value(config, *parameter, &values[0]).unwrap()
                    }
                };
                let mut c = c;
                // Skip the solver call that locates t0.
                c.switching.t0 = crate::config::Time::Ns(16.7);
                super::super::resolve(&c, None).unwrap_or_else(|e| panic!("{id}/{}: {e}", r.label));
            }
        }
        assert!(scenario("fig1").is_err());
    }
}
