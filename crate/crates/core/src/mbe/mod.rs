//! Maxwell-Bloch propagation of a weak pulse through the switched target.
//!
//! The wave equation is written in the retarded time t' = t - z/c, where it
//! reduces to dOmega/dz = i eta [C32 rho32 - C41 rho41]. The sample is cut
//! into `n_slices` slices with a density matrix on every slice boundary; at
//! any instant the field at boundary k follows from boundary k-1 by the
//! trapezoid rule on the source term. All boundaries are advanced together
//! in time, so the speed of light never enters.

mod density;
mod pulse;

pub use density::{bloch_rhs, DensityMatrix, E3, E4, G1, G2};
pub use pulse::{IncidentPulse, PulseShape};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{hyperfine_splitting, PhysicsModel};
use crate::record::FieldRecord;
use crate::switching::SwitchingSequence;
use density::bloch_rhs_flat;

/// Default recording window, ns.
pub const DEFAULT_T_MAX: f64 = 2410.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// Ground populations frozen at 1/2; only coherences evolve.
    #[default]
    Linear,
    /// Populations evolve too.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Integrator {
    /// Classic fixed-step fourth-order Runge-Kutta.
    #[default]
    Rk4,
    /// Dormand-Prince 5(4) with error control inside every output interval.
    Adaptive { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_slices: usize,
    pub dt: f64,
    pub t_max: f64,
    pub mode: SolverMode,
    pub integrator: Integrator,
}

impl SolverConfig {
    /// dt = min(T_QB / 400, tau / 20) with `n_slices` = 8.
    pub fn with_defaults(t_qb: Option<f64>, pulse_tau: f64) -> Self {
        let mut dt = pulse_tau / 20.0;
        if let Some(t) = t_qb {
            dt = dt.min(t / 400.0);
        }
        SolverConfig {
            n_slices: 8,
            dt,
            t_max: DEFAULT_T_MAX,
            mode: SolverMode::Linear,
            integrator: Integrator::Rk4,
        }
    }

    pub fn validate(&self, t_qb: Option<f64>) -> Result<()> {
        if self.n_slices < 1 {
            return Err(Error::invalid("n_slices must be >= 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if let Some(t) = t_qb {
            if self.dt > t / 100.0 {
                return Err(Error::invalid(format!(
                    "dt = {} ns does not resolve the beat (needs <= T_QB/100 = {} ns)",
                    self.dt,
                    t / 100.0
                )));
            }
        }
        if !(self.t_max > self.dt) {
            return Err(Error::invalid("t_max must exceed dt"));
        }
        if let Integrator::Adaptive { abs_tol, rel_tol } = self.integrator {
            if !(abs_tol > 0.0 && rel_tol > 0.0) {
                return Err(Error::invalid("integrator tolerances must be positive"));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Conservation and stability monitors collected during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    /// Largest |rho21| or |rho43| seen.
    pub max_hyperfine_coherence: f64,
    pub min_population: f64,
    pub max_population: f64,
    pub pulse_area: f64,
    pub steps: usize,
    pub rejected_steps: usize,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    /// Field leaving the sample, Omega(L, t).
    pub field: FieldRecord,
    pub diagnostics: Diagnostics,
    /// Slice-boundary states at t_max.
    pub final_states: Vec<DensityMatrix>,
}

struct System<'a> {
    pulse: &'a IncidentPulse,
    seq: &'a SwitchingSequence,
    model: &'a PhysicsModel,
    mode: SolverMode,
    delta_b: f64,
    n_nodes: usize,
    half_slice: Complex64,
    fields: Vec<Complex64>,
}

impl System<'_> {
    fn source(&self, state: &[Complex64], node: usize) -> Complex64 {
        let rho = &state[16 * node..16 * node + 16];
        self.model.c32 * rho[4 * E3 + G2] - self.model.c41 * rho[4 * E4 + G1]
    }

    /// Field on every slice boundary for the given states.
    fn fill_fields(&mut self, t: f64, state: &[Complex64]) {
        let mut omega = self.pulse.eval(t);
        let mut prev_src = self.source(state, 0);
        self.fields[0] = omega;
        for k in 1..self.n_nodes {
            let src = self.source(state, k);
            omega += self.half_slice * (prev_src + src);
            self.fields[k] = omega;
            prev_src = src;
        }
    }

    fn output_field(&self, t: f64, state: &[Complex64]) -> Complex64 {
        let mut omega = self.pulse.eval(t);
        for k in 1..self.n_nodes {
            omega += self.half_slice * (self.source(state, k - 1) + self.source(state, k));
        }
        omega
    }

    fn rhs(&mut self, t: f64, f: f64, state: &[Complex64], out: &mut [Complex64]) {
        self.fill_fields(t, state);
        for k in 0..self.n_nodes {
            let r = 16 * k..16 * k + 16;
            bloch_rhs_flat(
                &state[r.clone()],
                &mut out[r],
                self.fields[k],
                f,
                self.delta_b,
                self.model,
                self.mode,
            );
        }
    }
}

/// How the modulation is sampled inside one sub-interval.
#[derive(Clone, Copy)]
enum Modulation {
    /// Constant over the interval (stepwise schemes between switches).
    Frozen(f64),
    Sampled,
}

struct Workspace {
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
    y5: Vec<Complex64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            k: std::array::from_fn(|_| vec![ZERO; n]),
            tmp: vec![ZERO; n],
            y5: vec![ZERO; n],
        }
    }
}

// Stage times are pulled inside the interval by this fraction so one-sided
// limits are used at discontinuities sitting on interval ends.
const EDGE_NUDGE: f64 = 1e-9;

fn stage_time(a: f64, b: f64, c: f64) -> f64 {
    let h = b - a;
    let t = a + c * h;
    t.clamp(a + EDGE_NUDGE * h, b - EDGE_NUDGE * h)
}

fn modulation_at(sys: &System, m: Modulation, a: f64, b: f64, c: f64) -> f64 {
    match m {
        Modulation::Frozen(f) => f,
        Modulation::Sampled => sys.seq.eval(stage_time(a, b, c)),
    }
}

fn rk4_step(sys: &mut System, ws: &mut Workspace, y: &mut [Complex64], a: f64, b: f64, m: Modulation) {
    let h = b - a;
    let n = y.len();
    let [k1, k2, k3, k4, ..] = &mut ws.k;
    let tmp = &mut ws.tmp;

    let f1 = modulation_at(sys, m, a, b, 0.0);
    sys.rhs(stage_time(a, b, 0.0), f1, y, k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    let f2 = modulation_at(sys, m, a, b, 0.5);
    sys.rhs(stage_time(a, b, 0.5), f2, tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    sys.rhs(stage_time(a, b, 0.5), f2, tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    let f4 = modulation_at(sys, m, a, b, 1.0);
    sys.rhs(stage_time(a, b, 1.0), f4, tmp, k4);
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One trial Dormand-Prince step; returns the scaled error norm.
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn dp_trial(
    sys: &mut System,
    ws: &mut Workspace,
    y: &[Complex64],
    a: f64,
    b: f64,
    m: Modulation,
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    let h = b - a;
    let n = y.len();
    for s in 0..7 {
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..s {
                if DP_A[s][j] != 0.0 {
                    acc += h * DP_A[s][j] * ws.k[j][i];
                }
            }
            ws.tmp[i] = acc;
        }
        let f = modulation_at(sys, m, a, b, DP_C[s]);
        sys.rhs(stage_time(a, b, DP_C[s]), f, &ws.tmp, &mut ws.k[s]);
    }
    let mut err = 0.0f64;
    for i in 0..n {
        let mut hi = y[i];
        let mut lo = y[i];
        for s in 0..7 {
            hi += h * DP_B5[s] * ws.k[s][i];
            lo += h * DP_B4[s] * ws.k[s][i];
        }
        ws.y5[i] = hi;
        let scale = abs_tol + rel_tol * y[i].norm().max(hi.norm());
        err = err.max((hi - lo).norm() / scale);
    }
    err
}

#[allow(clippy::too_many_arguments)]
fn adaptive_interval(
    sys: &mut System,
    ws: &mut Workspace,
    y: &mut [Complex64],
    a: f64,
    b: f64,
    m: Modulation,
    abs_tol: f64,
    rel_tol: f64,
    diag: &mut Diagnostics,
) -> Result<()> {
    let mut t = a;
    let mut h = b - a;
    let mut guard = 0usize;
    while b - t > 1e-12 * (b - a) {
        let end = (t + h).min(b);
        let used = end - t;
        let err = dp_trial(sys, ws, y, t, end, m, abs_tol, rel_tol);
        if !err.is_finite() {
            return Err(Error::numerical(format!("non-finite error estimate at t = {t} ns")));
        }
        if err <= 1.0 {
            y.copy_from_slice(&ws.y5);
            t = end;
            diag.steps += 1;
        } else {
            diag.rejected_steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (used * factor).min(b - a);
        guard += 1;
        if guard > 100_000 {
            return Err(Error::numerical(format!("step size underflow near t = {t} ns")));
        }
    }
    Ok(())
}

/// Propagate `pulse` through the sample under switching `seq` at full field
/// `b0_tesla` and return the field at z = L.
pub fn propagate(
    pulse: &IncidentPulse,
    seq: &SwitchingSequence,
    model: &PhysicsModel,
    b0_tesla: f64,
    cfg: &SolverConfig,
) -> Result<Propagation> {
    model.validate()?;
    pulse.validate()?;
    let delta_b = hyperfine_splitting(model, b0_tesla)?;
    let t_qb = (delta_b > 0.0).then(|| 4.0 * std::f64::consts::PI / delta_b);
    cfg.validate(t_qb)?;
    if cfg.mode == SolverMode::Full && model.c32.abs() > 1.0 {
        return Err(Error::invalid("full mode needs |C| <= 1 for the decay branching"));
    }
    if cfg.mode == SolverMode::Linear && pulse.area() > 0.1 {
        log::warn!(
            "pulse area {:.3} rad is outside the weak-excitation regime assumed by linear mode",
            pulse.area()
        );
    }

    let n_nodes = cfg.n_slices + 1;
    let slice = model.length / cfg.n_slices as f64;
    let mut sys = System {
        pulse,
        seq,
        model,
        mode: cfg.mode,
        delta_b,
        n_nodes,
        half_slice: 0.5 * slice * model.eta() * I,
        fields: vec![ZERO; n_nodes],
    };

    let mut y: Vec<Complex64> = (0..n_nodes)
        .flat_map(|_| DensityMatrix::initial().as_flat())
        .collect();
    let mut ws = Workspace::new(y.len());

    let n_steps = cfg.n_steps();
    let t_end = n_steps as f64 * cfg.dt;
    let mut breaks: Vec<f64> = seq.breakpoints(t_end);
    breaks.extend(pulse.breakpoints());
    breaks.retain(|&b| b > 0.0 && b < t_end);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut next_break = 0usize;
    let piecewise = seq.is_piecewise_constant();

    let mut diag = Diagnostics {
        min_population: f64::INFINITY,
        max_population: f64::NEG_INFINITY,
        pulse_area: pulse.area(),
        ..Diagnostics::default()
    };
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(sys.output_field(0.0, &y));
    monitor(&y, n_nodes, &mut diag);

    let snap = 1e-9 * cfg.dt;
    for step in 0..n_steps {
        let a = step as f64 * cfg.dt;
        let b = (step + 1) as f64 * cfg.dt;
        let mut cuts = vec![a];
        while next_break < breaks.len() && breaks[next_break] < b - snap {
            let bp = breaks[next_break];
            if bp > a + snap {
                cuts.push(bp);
            }
            next_break += 1;
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let m = if piecewise {
                Modulation::Frozen(seq.eval(0.5 * (lo + hi)))
            } else {
                Modulation::Sampled
            };
            match cfg.integrator {
                Integrator::Rk4 => {
                    rk4_step(&mut sys, &mut ws, &mut y, lo, hi, m);
                    diag.steps += 1;
                }
                Integrator::Adaptive { abs_tol, rel_tol } => adaptive_interval(
                    &mut sys, &mut ws, &mut y, lo, hi, m, abs_tol, rel_tol, &mut diag,
                )?,
            }
        }
        let omega = sys.output_field(b, &y);
        if !(omega.re.is_finite() && omega.im.is_finite()) {
            return Err(Error::numerical(format!(
                "field became non-finite at t = {b} ns (step {step})"
            )));
        }
        out.push(omega);
        monitor(&y, n_nodes, &mut diag);
    }

    let final_states = (0..n_nodes)
        .map(|k| DensityMatrix::from_flat(&y[16 * k..16 * k + 16]))
        .collect();
    Ok(Propagation {
        field: FieldRecord::new(model.length, 0.0, cfg.dt, out)?,
        diagnostics: diag,
        final_states,
    })
}

fn monitor(y: &[Complex64], n_nodes: usize, diag: &mut Diagnostics) {
    for k in 0..n_nodes {
        let rho = DensityMatrix::from_flat(&y[16 * k..16 * k + 16]);
        diag.max_trace_error = diag.max_trace_error.max((rho.trace() - 1.0).norm());
        diag.max_hermiticity_error = diag.max_hermiticity_error.max(rho.hermiticity_error());
        diag.max_hyperfine_coherence = diag
            .max_hyperfine_coherence
            .max(rho.0[G2][G1].norm())
            .max(rho.0[E4][E3].norm());
        for i in 0..4 {
            diag.min_population = diag.min_population.min(rho.0[i][i].re);
            diag.max_population = diag.max_population.max(rho.0[i][i].re);
        }
    }
}

/// Relative L2 distance between two records on their common grid.
pub fn relative_l2(reference: &FieldRecord, other: &FieldRecord) -> Result<f64> {
    if reference.len() != other.len() || (reference.dt - other.dt).abs() > 1e-12 * reference.dt {
        return Err(Error::invalid("records are on different grids"));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in reference.values.iter().zip(&other.values) {
        num += (a - b).norm_sqr();
        den += a.norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// Resample `fine` (dt / k) onto the grid of a record with step dt.
pub fn decimate(fine: &FieldRecord, k: usize) -> FieldRecord {
    FieldRecord {
        z: fine.z,
        t_start: fine.t_start,
        dt: fine.dt * k as f64,
        values: fine.values.iter().step_by(k).copied().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Relative L2 change of the output when n_slices is doubled.
    pub slice_change: f64,
    /// Relative L2 change of the output when dt is halved.
    pub dt_change: f64,
    pub converged: bool,
}

/// Relative L2 change allowed when refining the grid.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-3;

/// Re-run with doubled `n_slices` and with halved `dt` and compare against `base`.
pub fn convergence_study(
    pulse: &IncidentPulse,
    seq: &SwitchingSequence,
    model: &PhysicsModel,
    b0_tesla: f64,
    cfg: &SolverConfig,
    base: &FieldRecord,
) -> Result<ConvergenceReport> {
    let finer_z = SolverConfig {
        n_slices: 2 * cfg.n_slices,
        ..*cfg
    };
    let finer_t = SolverConfig {
        dt: 0.5 * cfg.dt,
        ..*cfg
    };
    let (rz, rt) = rayon::join(
        || propagate(pulse, seq, model, b0_tesla, &finer_z),
        || propagate(pulse, seq, model, b0_tesla, &finer_t),
    );
    let slice_change = relative_l2(&rz?.field, base)?;
    let dt_change = relative_l2(&decimate(&rt?.field, 2), base)?;
    Ok(ConvergenceReport {
        slice_change,
        dt_change,
        converged: slice_change < CONVERGENCE_TOLERANCE && dt_change < CONVERGENCE_TOLERANCE,
    })
}

/// Locate the intensity minimum of `field` nearest to `guess`, searching
/// `guess +- half_width` and refining with a parabola through the three
/// samples around the smallest one.
pub fn refine_beat_minimum(field: &FieldRecord, guess: f64, half_width: f64) -> Result<f64> {
    let lo = field.index_at_or_after(guess - half_width);
    let hi = field
        .index_at_or_before(guess + half_width)
        .ok_or_else(|| Error::invalid("search window precedes the record"))?;
    if hi <= lo + 2 || hi >= field.len() {
        return Err(Error::invalid("search window does not fit inside the record"));
    }
    let intensity: Vec<f64> = field.values[lo..=hi].iter().map(|v| v.norm_sqr()).collect();
    let (imin, _) = intensity
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty window");
    if imin == 0 || imin == intensity.len() - 1 {
        return Err(Error::numerical("no interior intensity minimum near the guess"));
    }
    let (ym, y0, yp) = (intensity[imin - 1], intensity[imin], intensity[imin + 1]);
    let denom = ym - 2.0 * y0 + yp;
    let offset = if denom > 0.0 { 0.5 * (ym - yp) / denom } else { 0.0 };
    Ok(field.time(lo + imin) + offset * field.dt)
}
