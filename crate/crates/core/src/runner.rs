//! Configured runs: resolve a [`RunConfig`], drive the solver, the analytic
//! model and the spectral analysis, and lay the results out on disk.

mod scenarios;

pub use scenarios::{run_scenario, scenario, ScenarioRun, ScenarioTask, JITTER_SEEDS, SCENARIO_IDS};

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, AnalyticModelParams, AnalyticScheme};
use crate::config::{RunConfig, SweepParameter, Time, DEFAULT_PULSE_AREA};
use crate::error::{Error, Result};
use crate::io;
use crate::mbe::{
    self, ConvergenceReport, Diagnostics, IncidentPulse, Propagation, PulseShape, SolverConfig,
};
use crate::physics::{beat_quantities, peak_spacing_prediction, BeatQuantities, PhysicsModel};
use crate::record::FieldRecord;
use crate::spectrum::{
    comb_metrics, find_peaks, windowed_dft_with, CombMetrics, DftOptions, SpectrumRecord,
};
use crate::switching::{check_on_interval, first_beat_minimum, Scheme, SwitchingSequence, SwitchingSpec};

/// A configuration with every derived value filled in.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    /// Configuration holding plain numbers only.
    pub config: RunConfig,
    pub hash: String,
    pub model: PhysicsModel,
    pub b0: f64,
    pub beat: Option<BeatQuantities>,
    pub pulse: IncidentPulse,
    pub sequence: SwitchingSequence,
    pub solver: SolverConfig,
    /// Transform window, ns.
    pub window: (f64, f64),
}

impl ResolvedRun {
    pub fn predicted_spacing(&self) -> Option<f64> {
        let s = self.sequence.spec();
        match s.scheme {
            Scheme::Constant | Scheme::Off => None,
            _ => peak_spacing_prediction(s.t_on, s.t_off).ok(),
        }
    }

    fn comments(&self) -> Vec<String> {
        io::provenance_comments(
            &self.hash,
            &[format!(
                "scheme: {}, b0: {} T, xi: {}",
                self.sequence.scheme().name(),
                self.b0,
                self.model.xi
            )],
        )
    }
}

/// Resolve `cfg`. An `auto` first switch-off is located on a short
/// constant-field run, or on `field` when one is supplied.
pub fn resolve(cfg: &RunConfig, field: Option<&FieldRecord>) -> Result<ResolvedRun> {
    let model = cfg.physics.model();
    model.validate()?;
    let b0 = cfg.physics.b0;
    if !(b0.is_finite() && b0 >= 0.0) {
        return Err(Error::config(format!("b0 must be >= 0, got {b0}")));
    }
    let beat = if b0 > 0.0 {
        Some(beat_quantities(&model, b0)?)
    } else {
        None
    };
    let t_qb = beat.map(|b| b.t_qb);
    let mut out = cfg.clone();
    out.output_dir = None;

    let p = &cfg.pulse;
    let pulse = match (p.area, p.amplitude) {
        (Some(_), Some(_)) => return Err(Error::config("give either pulse.area or pulse.amplitude")),
        (None, Some(a)) => IncidentPulse {
            shape: p.shape,
            amplitude: a,
            t_delay: p.t_delay,
            tau: p.tau,
        },
        (area, None) => {
            IncidentPulse::with_area(p.shape, area.unwrap_or(DEFAULT_PULSE_AREA), p.t_delay, p.tau)
        }
    };
    pulse.validate()?;
    out.pulse.area = None;
    out.pulse.amplitude = Some(pulse.amplitude);

    let s = &cfg.solver;
    let defaults = SolverConfig::with_defaults(t_qb, pulse.tau);
    let dt = match s.dt {
        Time::Auto => defaults.dt,
        other => other.resolve(t_qb)?.expect("non-auto time"),
    };
    let solver = SolverConfig {
        n_slices: s.n_slices,
        dt,
        t_max: s.t_max,
        mode: s.mode,
        integrator: s.integrator,
    };
    solver.validate(t_qb)?;
    out.solver.dt = Time::Ns(dt);

    let sw = &cfg.switching;
    let periodic = !matches!(sw.scheme, Scheme::Constant | Scheme::Off);
    let duration = |t: Time, name: &str| -> Result<f64> {
        match t {
            Time::Auto => Err(Error::config(format!("switching.{name} cannot be auto"))),
            other => match other.resolve(t_qb) {
                Ok(v) => Ok(v.expect("non-auto time")),
                Err(_) if !periodic => Ok(0.0),
                Err(e) => Err(e),
            },
        }
    };
    let t_on = duration(sw.t_on, "t_on")?;
    let t_off = duration(sw.t_off, "t_off")?;
    if periodic && beat.is_none() {
        return Err(Error::config(format!(
            "scheme {} needs a nonzero field b0",
            sw.scheme.name()
        )));
    }
    let t0 = match sw.t0 {
        Time::Auto => locate_first_minimum(&model, b0, beat, &pulse, &solver, field)?,
        other => other.resolve(t_qb)?.expect("non-auto time"),
    };
    out.switching.t0 = Time::Ns(t0);
    out.switching.t_on = Time::Ns(t_on);
    out.switching.t_off = Time::Ns(t_off);
    let seed = if sw.scheme == Scheme::RegularRandomized {
        Some(cfg.seed.unwrap_or(0))
    } else {
        None
    };
    if seed.is_some() {
        out.seed = seed;
    }
    let spec = SwitchingSpec {
        scheme: sw.scheme,
        t0,
        t_on,
        t_off,
        epsilon: sw.epsilon,
        jitter_fraction: sw.jitter_fraction,
        seed,
    };
    let t_end_record = solver.n_steps() as f64 * solver.dt;
    let sequence = SwitchingSequence::new(spec, t_end_record)?;
    if let (true, Some(b)) = (periodic, beat.as_ref()) {
        check_on_interval(t_on, b);
    }

    let sp = &cfg.spectrum;
    let t_start = match sp.t_start {
        Time::Auto => t0,
        other => other.resolve(t_qb)?.expect("non-auto time"),
    };
    let t_end = match sp.t_end {
        Time::Auto => t_end_record,
        other => other.resolve(t_qb)?.expect("non-auto time"),
    };
    if !(t_end > t_start) {
        return Err(Error::config(format!("spectrum window [{t_start}, {t_end}] is empty")));
    }
    if !(sp.rel_threshold > 0.0 && sp.rel_threshold < 1.0) {
        return Err(Error::config("spectrum.rel_threshold must lie in (0, 1)"));
    }
    if sp.zero_pad == 0 {
        return Err(Error::config("spectrum.zero_pad must be >= 1"));
    }
    out.spectrum.t_start = Time::Ns(t_start);
    out.spectrum.t_end = Time::Ns(t_end);

    let hash = io::config_hash(&out)?;
    Ok(ResolvedRun {
        config: out,
        hash,
        model,
        b0,
        beat,
        pulse,
        sequence,
        solver,
        window: (t_start, t_end),
    })
}

/// First intensity minimum of the beat after the excitation; without a
/// field, the end of the incident pulse.
fn locate_first_minimum(
    model: &PhysicsModel,
    b0: f64,
    beat: Option<BeatQuantities>,
    pulse: &IncidentPulse,
    solver: &SolverConfig,
    field: Option<&FieldRecord>,
) -> Result<f64> {
    let Some(beat) = beat else {
        return Ok(match pulse.shape {
            PulseShape::Gaussian => pulse.t_delay + 3.0 * pulse.tau,
            PulseShape::ExponentialSource => pulse.excitation_time(),
        });
    };
    let guess = first_beat_minimum(&beat, pulse.excitation_time());
    let half_width = beat.t_qb / 8.0;
    let refined = match field {
        Some(f) => mbe::refine_beat_minimum(f, guess, half_width),
        None => {
            let short = SolverConfig {
                t_max: (guess + 0.5 * beat.t_qb).min(solver.t_max),
                ..*solver
            };
            let run = mbe::propagate(pulse, &SwitchingSequence::constant(), model, b0, &short)?;
            mbe::refine_beat_minimum(&run.field, guess, half_width)
        }
    };
    Ok(refined.unwrap_or_else(|e| {
        log::warn!("could not refine the first beat minimum ({e}); using {guess:.4} ns");
        guess
    }))
}

/// Solver output together with the resolved run it came from.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub run: ResolvedRun,
    pub propagation: Propagation,
    pub convergence: Option<ConvergenceReport>,
}

/// Resolve and propagate, without touching the file system.
pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    let run = resolve(cfg, None)?;
    let propagation = mbe::propagate(&run.pulse, &run.sequence, &run.model, run.b0, &run.solver)?;
    let convergence = if cfg.solver.check_convergence {
        let report = mbe::convergence_study(
            &run.pulse,
            &run.sequence,
            &run.model,
            run.b0,
            &run.solver,
            &propagation.field,
        )?;
        if !report.converged {
            log::warn!(
                "grid not converged: slice change {:.2e}, dt change {:.2e}",
                report.slice_change,
                report.dt_change
            );
        }
        Some(report)
    } else {
        None
    };
    Ok(Simulation {
        run,
        propagation,
        convergence,
    })
}

/// Spectrum of a field and its comb figures.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// Unpadded transform over the run window.
    pub spectrum: SpectrumRecord,
    pub metrics: CombMetrics,
}

/// Transform `field` over the run window; peaks are located on the
/// zero-padded transform, everything else uses the native grid.
pub fn analyse(field: &FieldRecord, run: &ResolvedRun) -> Result<Analysis> {
    let (t_start, t_end) = run.window;
    let beat_period = run.beat.map(|b| b.t_qb);
    let spectrum = windowed_dft_with(
        field,
        t_start,
        t_end,
        &DftOptions {
            zero_pad: 1,
            beat_period,
        },
    )?;
    let padded = windowed_dft_with(
        field,
        t_start,
        t_end,
        &DftOptions {
            zero_pad: run.config.spectrum.zero_pad,
            beat_period: None,
        },
    )?;
    let peaks = find_peaks(&padded, run.config.spectrum.rel_threshold)?;
    let metrics = comb_metrics(&peaks, &padded, field, &run.sequence);
    Ok(Analysis { spectrum, metrics })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsFile {
    pub config_hash: String,
    pub source: String,
    pub scheme: String,
    pub t0: f64,
    pub window: (f64, f64),
    pub resolution: Option<f64>,
    pub predicted_spacing: Option<f64>,
    pub comb: Option<CombMetrics>,
    pub diagnostics: Option<Diagnostics>,
    pub convergence: Option<ConvergenceReport>,
}

impl MetricsFile {
    fn new(run: &ResolvedRun, source: &str) -> Self {
        MetricsFile {
            config_hash: run.hash.clone(),
            source: source.to_string(),
            scheme: run.sequence.scheme().name().to_string(),
            t0: run.sequence.t0(),
            window: run.window,
            resolution: None,
            predicted_spacing: run.predicted_spacing(),
            comb: None,
            diagnostics: None,
            convergence: None,
        }
    }
}

/// Output directory: explicit, else the config's, else `<root>/run`.
pub fn output_dir(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| io::default_output_root().join("run"))
}

/// Propagate and write `field.csv`, `config.json` and `metrics.json`
/// (diagnostics only).
pub fn run_simulate(cfg: &RunConfig, dir: &Path) -> Result<Simulation> {
    let sim = simulate(cfg)?;
    let run = &sim.run;
    io::write_field(&dir.join(io::FIELD_FILE), &sim.propagation.field, &run.comments())?;
    io::write_config(dir, &run.config)?;
    let mut meta = MetricsFile::new(run, "numeric");
    meta.diagnostics = Some(sim.propagation.diagnostics);
    meta.convergence = sim.convergence;
    io::write_json(&dir.join(io::METRICS_FILE), &meta)?;
    Ok(sim)
}

#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub simulation: Option<Simulation>,
    pub run: ResolvedRun,
    pub analysis: Analysis,
}

/// Propagate, transform and write all four run files.
pub fn run_spectrum(cfg: &RunConfig, dir: &Path) -> Result<SpectrumRun> {
    let sim = run_simulate(cfg, dir)?;
    let analysis = analyse(&sim.propagation.field, &sim.run)?;
    write_analysis(dir, &sim.run, &analysis, Some(&sim))?;
    Ok(SpectrumRun {
        run: sim.run.clone(),
        simulation: Some(sim),
        analysis,
    })
}

/// Transform a previously written field file; `cfg` supplies the window and
/// the switching sequence used for the time-domain figures.
pub fn run_spectrum_from_field(field_path: &Path, cfg: &RunConfig, dir: &Path) -> Result<SpectrumRun> {
    let field = io::read_field(field_path)?;
    let run = resolve(cfg, Some(&field))?;
    let analysis = analyse(&field, &run)?;
    io::write_config(dir, &run.config)?;
    write_analysis(dir, &run, &analysis, None)?;
    Ok(SpectrumRun {
        simulation: None,
        run,
        analysis,
    })
}

fn write_analysis(dir: &Path, run: &ResolvedRun, analysis: &Analysis, sim: Option<&Simulation>) -> Result<()> {
    io::write_spectrum(&dir.join(io::SPECTRUM_FILE), &analysis.spectrum, &run.comments())?;
    let mut meta = MetricsFile::new(run, "numeric");
    meta.resolution = Some(analysis.spectrum.resolution);
    meta.comb = Some(analysis.metrics.clone());
    if let Some(sim) = sim {
        meta.diagnostics = Some(sim.propagation.diagnostics);
        meta.convergence = sim.convergence;
    }
    io::write_json(&dir.join(io::METRICS_FILE), &meta)
}

/// Analytic counterpart of a resolved run.
pub fn analytic_params(run: &ResolvedRun) -> Result<(AnalyticModelParams, f64)> {
    let beat = run
        .beat
        .ok_or_else(|| Error::config("the analytic model needs a nonzero field b0"))?;
    let s = run.sequence.spec();
    let (scheme, origin) = match s.scheme {
        Scheme::Constant => (AnalyticScheme::Constant, s.t0),
        Scheme::Regular => (AnalyticScheme::Regular, s.t0 + s.t_off),
        Scheme::Inverted => (AnalyticScheme::Inverted, s.t0 + s.t_off),
        other => {
            return Err(Error::config(format!(
                "no analytic model for scheme {}",
                other.name()
            )))
        }
    };
    let params = AnalyticModelParams {
        omega_qb: beat.omega_qb,
        gamma: run.model.gamma,
        t_on: if scheme == AnalyticScheme::Constant { beat.half_period() } else { s.t_on },
        t_off: s.t_off,
        amplitude: run.config.analytic.amplitude,
        scheme,
    };
    params.validate()?;
    Ok((params, origin))
}

/// Frequency grid of the analytic spectrum: the padded transform step over
/// `[-omega_max, omega_max]`.
pub fn analytic_grid(run: &ResolvedRun) -> Vec<f64> {
    let (a, b) = run.window;
    let step = 2.0 * PI / (b - a) / run.config.spectrum.zero_pad as f64;
    let n = (run.config.analytic.omega_max / step).floor() as i64;
    (-n..=n).map(|k| k as f64 * step).collect()
}

#[derive(Debug, Clone)]
pub struct AnalyticRun {
    pub run: ResolvedRun,
    pub params: AnalyticModelParams,
    /// Model origin on the run clock, ns.
    pub origin: f64,
    pub field: FieldRecord,
    pub spectrum: SpectrumRecord,
}

/// Evaluate the analytic model without writing anything. The time series
/// shares the solver grid over the transform window.
pub fn analytic(cfg: &RunConfig) -> Result<AnalyticRun> {
    let run = resolve(cfg, None)?;
    let (params, origin) = analytic_params(&run)?;
    let dt = run.solver.dt;
    let i0 = (run.window.0 / dt - 1e-9).ceil() as usize;
    let i1 = (run.window.1 / dt + 1e-9).floor() as usize;
    let field = analytic::analytic_field(&params, origin, i0 as f64 * dt, dt, i1 - i0 + 1)?;
    let spectrum =
        analytic::analytic_spectrum(&params, &analytic_grid(&run), run.config.analytic.truncation)?;
    Ok(AnalyticRun {
        run,
        params,
        origin,
        field,
        spectrum,
    })
}

/// Write the analytic time series and closed-form spectrum.
pub fn run_analytic(cfg: &RunConfig, dir: &Path) -> Result<AnalyticRun> {
    let a = analytic(cfg)?;
    let mut comments = a.run.comments();
    comments.push("source: analytic".into());
    comments.push(format!("model origin: {} ns", a.origin));
    io::write_field(&dir.join(io::FIELD_FILE), &a.field, &comments)?;
    io::write_spectrum(&dir.join(io::SPECTRUM_FILE), &a.spectrum, &comments)?;
    io::write_config(dir, &a.run.config)?;
    let peaks = find_peaks(&a.spectrum, a.run.config.spectrum.rel_threshold)?;
    let mut meta = MetricsFile::new(&a.run, "analytic");
    meta.resolution = Some(a.spectrum.grid_step());
    meta.comb = Some(comb_metrics(&peaks, &a.spectrum, &a.field, &a.run.sequence));
    io::write_json(&dir.join(io::METRICS_FILE), &meta)?;
    Ok(a)
}

/// Apply one sweep value to a copy of `cfg`.
pub fn with_sweep_value(cfg: &RunConfig, parameter: SweepParameter, value: &serde_json::Value) -> Result<RunConfig> {
    let bad = || Error::config(format!("bad {} value {value}", parameter.name()));
    let number = || value.as_f64().ok_or_else(bad);
    let time = || serde_json::from_value::<Time>(value.clone()).map_err(|_| bad());
    let mut c = cfg.clone();
    c.sweep = None;
    match parameter {
        SweepParameter::TOff => c.switching.t_off = time()?,
        SweepParameter::TOn => c.switching.t_on = time()?,
        SweepParameter::Xi => c.physics.xi = number()?,
        SweepParameter::B0 => c.physics.b0 = number()?,
        SweepParameter::Epsilon => c.switching.epsilon = Some(number()?),
        SweepParameter::JitterFraction => c.switching.jitter_fraction = Some(number()?),
        SweepParameter::Seed => c.seed = Some(value.as_u64().ok_or_else(bad)?),
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: String,
    pub t_on: f64,
    pub t_off: f64,
    pub delta_f_measured: Option<f64>,
    pub delta_f_predicted: Option<f64>,
    pub spacing_rel_std: Option<f64>,
    pub repetition_period_std: Option<f64>,
    pub suppression_ratio: Option<f64>,
}

fn value_label(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Run `values` of `parameter` concurrently (at most `jobs` at a time when
/// given), one subdirectory each, and write `summary.csv`. Rows keep the
/// order of `values`.
pub fn run_sweep(
    cfg: &RunConfig,
    parameter: SweepParameter,
    values: &[serde_json::Value],
    dir: &Path,
    jobs: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::config("sweep needs at least one value"));
    }
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|v| with_sweep_value(cfg, parameter, v))
        .collect::<Result<_>>()?;
    let work = || -> Vec<Result<SweepRow>> {
        configs
            .par_iter()
            .zip(values.par_iter())
            .enumerate()
            .map(|(i, (c, v))| {
                let sub = dir.join(format!("{i:03}"));
                let r = run_spectrum(c, &sub)?;
                let s = r.run.sequence.spec();
                let m = &r.analysis.metrics;
                Ok(SweepRow {
                    value: value_label(v),
                    t_on: s.t_on,
                    t_off: s.t_off,
                    delta_f_measured: m.mean_spacing,
                    delta_f_predicted: r.run.predicted_spacing(),
                    spacing_rel_std: m.spacing_rel_std,
                    repetition_period_std: m.repetition_period_std,
                    suppression_ratio: m.suppression_ratio,
                })
            })
            .collect()
    };
    let results = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(work),
        None => work(),
    };
    let rows: Vec<SweepRow> = results.into_iter().collect::<Result<_>>()?;
    write_summary(&dir.join(io::SUMMARY_FILE), parameter, &rows, &io::config_hash(cfg)?)?;
    Ok(rows)
}

fn write_summary(path: &Path, parameter: SweepParameter, rows: &[SweepRow], hash: &str) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.9e}")).unwrap_or_default();
    let mut text = format!("# config_hash: {hash}\n# parameter: {}\n", parameter.name());
    text.push_str(
        "value,t_on_ns,t_off_ns,delta_f_measured,delta_f_predicted,spacing_rel_std,repetition_period_std_ns,suppression_ratio\n",
    );
    for r in rows {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        wtr.write_record([
            r.value.clone(),
            format!("{:.9}", r.t_on),
            format!("{:.9}", r.t_off),
            opt(r.delta_f_measured),
            opt(r.delta_f_predicted),
            opt(r.spacing_rel_std),
            opt(r.repetition_period_std),
            opt(r.suppression_ratio),
        ])?;
        text.push_str(&String::from_utf8(wtr.into_inner().map_err(|e| Error::invalid(e.to_string()))?).expect("csv writes utf-8"));
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeakDelta {
    pub analytic_position: f64,
    pub numeric_position: f64,
    pub position_delta: f64,
    /// Relative height difference after the fitted scale is applied.
    pub relative_height_delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub window: (f64, f64),
    /// Complex factor mapping the analytic series onto the numeric one.
    pub scale: (f64, f64),
    /// |numeric - scale * analytic| / |numeric| over the window.
    pub relative_l2: f64,
    pub resolution: f64,
    pub peaks: Vec<PeakDelta>,
}

/// Relative L2 distance between `numeric` and the best complex multiple of
/// `analytic` over their common samples in `[t_from, t_to]`.
pub fn scaled_l2(numeric: &FieldRecord, analytic: &FieldRecord, t_from: f64, t_to: f64) -> Result<(f64, Complex64, (usize, usize, usize))> {
    if (numeric.dt - analytic.dt).abs() > 1e-9 * numeric.dt {
        return Err(Error::invalid("records have different time steps"));
    }
    let shift = (analytic.t_start - numeric.t_start) / numeric.dt;
    if (shift - shift.round()).abs() > 1e-6 {
        return Err(Error::invalid("records are on offset grids"));
    }
    let lo = t_from.max(numeric.t_start).max(analytic.t_start);
    let hi = t_to.min(numeric.t_max()).min(analytic.t_max());
    if !(hi > lo) {
        return Err(Error::invalid("records do not overlap on the requested window"));
    }
    let n0 = numeric.index_at_or_after(lo);
    let n1 = numeric
        .index_at_or_before(hi)
        .ok_or_else(|| Error::invalid("window precedes the numeric record"))?;
    let a0 = (n0 as i64 - shift.round() as i64) as usize;
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for k in 0..=(n1 - n0) {
        let (x, y) = (numeric.values[n0 + k], analytic.values[a0 + k]);
        num += y.conj() * x;
        den += y.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::numerical("analytic series vanishes on the window"));
    }
    let scale = num / den;
    let (mut err, mut norm) = (0.0, 0.0);
    for k in 0..=(n1 - n0) {
        let (x, y) = (numeric.values[n0 + k], analytic.values[a0 + k]);
        err += (x - scale * y).norm_sqr();
        norm += x.norm_sqr();
    }
    Ok(((err / norm).sqrt(), scale, (n0, a0, n1 - n0 + 1)))
}

/// Compare a numeric and an analytic field over their overlap (or the given
/// window): relative L2 after a complex scale fit, and per-peak deltas of the
/// two transforms for peaks above `rel_threshold` of the analytic maximum.
pub fn compare(
    numeric: &FieldRecord,
    analytic: &FieldRecord,
    window: Option<(f64, f64)>,
    rel_threshold: f64,
) -> Result<CompareReport> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let (l2, scale, (n0, _, len)) = scaled_l2(numeric, analytic, lo, hi)?;
    let t_from = numeric.time(n0);
    let t_to = numeric.time(n0 + len - 1);
    let opts = DftOptions {
        zero_pad: 4,
        beat_period: None,
    };
    let sn = windowed_dft_with(numeric, t_from, t_to, &opts)?;
    let sa = windowed_dft_with(analytic, t_from, t_to, &opts)?;
    let pn = find_peaks(&sn, rel_threshold)?;
    let pa = find_peaks(&sa, rel_threshold)?;
    let s2 = scale.norm_sqr();
    let peaks = pa
        .iter()
        .filter_map(|a| {
            let n = pn.iter().min_by(|x, y| {
                (x.position - a.position).abs().total_cmp(&(y.position - a.position).abs())
            })?;
            Some(PeakDelta {
                analytic_position: a.position,
                numeric_position: n.position,
                position_delta: n.position - a.position,
                relative_height_delta: (n.height - s2 * a.height) / (s2 * a.height),
            })
        })
        .collect();
    Ok(CompareReport {
        window: (t_from, t_to),
        scale: (scale.re, scale.im),
        relative_l2: l2,
        resolution: sn.resolution,
        peaks,
    })
}

/// Compare two field files and write the JSON report to `out` when given.
pub fn run_compare(
    numeric: &Path,
    analytic: &Path,
    window: Option<(f64, f64)>,
    rel_threshold: f64,
    out: Option<&Path>,
) -> Result<CompareReport> {
    let report = compare(&io::read_field(numeric)?, &io::read_field(analytic)?, window, rel_threshold)?;
    if let Some(path) = out {
        io::write_json(path, &report)?;
    }
    Ok(report)
}

/// Samples of f(t) on `[0, t_end]` with step `dt` (defaults: solver step and
/// window end).
pub fn sequence_samples(run: &ResolvedRun, dt: Option<f64>, t_end: Option<f64>) -> Result<Vec<(f64, f64)>> {
    let dt = dt.unwrap_or(run.solver.dt);
    let t_end = t_end.unwrap_or(run.window.1);
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::invalid("dt and t_end must be positive"));
    }
    let n = (t_end / dt).round() as usize;
    Ok((0..=n)
        .map(|i| {
            let t = i as f64 * dt;
            (t, run.sequence.eval(t))
        })
        .collect())
}

/// Write `t_ns,f` for the configured sequence.
pub fn dump_sequence(cfg: &RunConfig, path: &Path, dt: Option<f64>, t_end: Option<f64>) -> Result<ResolvedRun> {
    let run = resolve(cfg, None)?;
    let samples = sequence_samples(&run, dt, t_end)?;
    let mut text = String::new();
    for c in run.comments() {
        writeln!(text, "# {c}").expect("write to string");
    }
    text.push_str("t_ns,f\n");
    for (t, f) in samples {
        writeln!(text, "{t:.6},{f:.12e}").expect("write to string");
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(overrides: &[&str]) -> RunConfig {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        RunConfig::with_overrides(&o).unwrap()
    }

    #[test]
    fn resolution_fills_every_value() {
        let r = resolve(&cfg(&["switching.scheme=regular", "switching.t_off=\"1 tqb\""]), None).unwrap();
        let beat = r.beat.unwrap();
        let c = &r.config;
        assert!(matches!(c.switching.t0, Time::Ns(_)));
        assert_eq!(c.switching.t_on, Time::Ns(beat.half_period()));
        assert_eq!(c.switching.t_off, Time::Ns(beat.t_qb));
        assert!(matches!(c.solver.dt, Time::Ns(_)));
        assert!(c.pulse.area.is_none() && c.pulse.amplitude.is_some());
        // t0 sits within a few samples of the quarter-period estimate.
        let t0 = r.sequence.t0();
        assert!((t0 - first_beat_minimum(&beat, 10.0)).abs() < 0.05, "t0 = {t0}");
        // Re-resolving the resolved configuration changes nothing.
        let again = resolve(&r.config, None).unwrap();
        assert_eq!(again.config, r.config);
        assert_eq!(again.hash, r.hash);
    }

    #[test]
    fn zero_field_needs_no_beat() {
        let r = resolve(&cfg(&["physics.b0=0.0", "physics.xi=0.25"]), None).unwrap();
        assert!(r.beat.is_none());
        assert_eq!(r.sequence.t0(), 13.0);
        assert!(resolve(&cfg(&["physics.b0=0.0", "switching.scheme=regular"]), None).is_err());
    }

    #[test]
    fn conflicting_settings_are_rejected() {
        assert!(resolve(&cfg(&["pulse.area=0.01", "pulse.amplitude=0.1"]), None).is_err());
        assert!(resolve(&cfg(&["switching.scheme=regular", "switching.epsilon=0.5"]), None).is_err());
        assert!(resolve(&cfg(&["solver.dt=1.0"]), None).is_err());
        assert!(resolve(&cfg(&["spectrum.t_start=100.0", "spectrum.t_end=50.0"]), None).is_err());
    }

    #[test]
    fn sweep_values_apply() {
        let base = cfg(&["switching.scheme=regular"]);
        let c = with_sweep_value(&base, SweepParameter::TOff, &serde_json::json!("1.5 tqb")).unwrap();
        assert_eq!(c.switching.t_off, Time::BeatPeriods(1.5));
        let c = with_sweep_value(&base, SweepParameter::TOff, &serde_json::json!(20.0)).unwrap();
        assert_eq!(c.switching.t_off, Time::Ns(20.0));
        let c = with_sweep_value(&base, SweepParameter::Seed, &serde_json::json!(5)).unwrap();
        assert_eq!(c.seed, Some(5));
        assert!(with_sweep_value(&base, SweepParameter::Xi, &serde_json::json!("a")).is_err());
    }

    #[test]
    fn analytic_origin_follows_first_storage() {
        let a = analytic(&cfg(&["switching.scheme=regular", "switching.t0=16.7"])).unwrap();
        let h = a.run.beat.unwrap().half_period();
        assert!((a.origin - (16.7 + h)).abs() < 1e-12);
        assert_eq!(a.field.dt, a.run.solver.dt);
        assert!(analytic(&cfg(&["switching.scheme=sinusoidal", "switching.t0=16.7"])).is_err());
    }

    #[test]
    fn sequence_dump_matches_eval() {
        let c = cfg(&["switching.scheme=inverted", "switching.t0=16.7"]);
        let r = resolve(&c, None).unwrap();
        let s = sequence_samples(&r, Some(0.5), Some(200.0)).unwrap();
        assert_eq!(s.len(), 401);
        assert!(s.iter().all(|&(t, f)| f == r.sequence.eval(t)));
        assert!(s.iter().any(|&(_, f)| f == -1.0));
    }
}
