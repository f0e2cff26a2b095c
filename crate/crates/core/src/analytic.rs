//! First-order (single-scattering) model of the switched response.
//!
//! In the thin-sample limit the field after the first beat minimum is a train
//! of cut sine lobes under the exponential envelope exp(-gamma t / 2). Its
//! transform is a sum of Lorentzians of half-width gamma/2 whose weights are
//! the Fourier coefficients of one lobe. Time origin: the start of the first
//! emitting lobe (the global shift is a pure phase and is dropped).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::record::FieldRecord;
use crate::spectrum::{SpectrumRecord, SpectrumSource};

/// Distance from a singular index n = +-k below which quadrature is used.
const SINGULAR_WINDOW: f64 = 1e-6;
/// Relative size of the largest omitted tooth under automatic truncation.
pub const TAIL_TOLERANCE: f64 = 1e-6;
pub const MIN_TERMS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyticScheme {
    Constant,
    Regular,
    Inverted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticModelParams {
    pub omega_qb: f64,
    pub gamma: f64,
    pub t_on: f64,
    pub t_off: f64,
    pub amplitude: f64,
    pub scheme: AnalyticScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "terms")]
pub enum Truncation {
    /// Enough terms that every omitted tooth is below [`TAIL_TOLERANCE`] of
    /// the largest retained one (never fewer than [`MIN_TERMS`]).
    #[default]
    Auto,
    /// |n| <= N.
    Fixed(usize),
}

impl AnalyticModelParams {
    pub fn t_qb(&self) -> f64 {
        2.0 * PI / self.omega_qb
    }

    /// Switching period t_on + t_off.
    pub fn period(&self) -> f64 {
        self.t_on + self.t_off
    }

    /// Integer m with t_on = m T_QB / 2.
    pub fn half_period_multiple(&self) -> Result<u32> {
        half_period_multiple(self.t_on, self.omega_qb)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_qb > 0.0 && self.gamma > 0.0) {
            return Err(Error::invalid("omega_qb and gamma must be positive"));
        }
        if self.scheme != AnalyticScheme::Constant {
            self.half_period_multiple()?;
            if self.t_off < 0.0 {
                return Err(Error::invalid("t_off must be >= 0"));
            }
        }
        Ok(())
    }

    /// Comb tooth positions inside `[lo, hi]`, rad/ns.
    pub fn tooth_positions(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (offset, step) = match self.scheme {
            AnalyticScheme::Constant => {
                return [-self.omega_qb, self.omega_qb]
                    .into_iter()
                    .filter(|w| *w >= lo && *w <= hi)
                    .collect()
            }
            AnalyticScheme::Regular => (PI / self.period(), 2.0 * PI / self.period()),
            AnalyticScheme::Inverted => (0.0, 2.0 * PI / self.period()),
        };
        let first = ((lo - offset) / step).ceil() as i64;
        let last = ((hi - offset) / step).floor() as i64;
        (first..=last).map(|n| offset + n as f64 * step).collect()
    }
}

fn half_period_multiple(t_on: f64, omega_qb: f64) -> Result<u32> {
    let half = PI / omega_qb;
    let m = t_on / half;
    let rounded = m.round();
    if rounded < 1.0 || (m - rounded).abs() > 1e-9 * rounded {
        return Err(Error::invalid(format!(
            "t_on must be a positive multiple of T_QB/2; got {m} half periods"
        )));
    }
    Ok(rounded as u32)
}

/// One lobe sin(omega_qb t) on [0, t_on).
fn single_lobe(t: f64, t_on: f64, omega_qb: f64) -> f64 {
    if (0.0..t_on).contains(&t) {
        (omega_qb * t).sin()
    } else {
        0.0
    }
}

/// Lobe train with repetition period `t_rep`.
fn lobe_train(t: f64, t_rep: f64, t_on: f64, omega_qb: f64) -> f64 {
    let phase = t - (t / t_rep).floor() * t_rep;
    single_lobe(phase, t_on, omega_qb)
}

/// Field amplitude at time `t` after the model origin.
pub fn analytic_time(p: &AnalyticModelParams, t: f64) -> Complex64 {
    if t < 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let envelope = p.amplitude * (-0.5 * p.gamma * t).exp();
    let shape = match p.scheme {
        AnalyticScheme::Constant => (p.omega_qb * t).sin(),
        AnalyticScheme::Regular => {
            let t_rep = 2.0 * p.period();
            lobe_train(t, t_rep, p.t_on, p.omega_qb)
                - lobe_train(t - p.period(), t_rep, p.t_on, p.omega_qb)
        }
        AnalyticScheme::Inverted => lobe_train(t, p.period(), p.t_on, p.omega_qb),
    };
    Complex64::new(envelope * shape, 0.0)
}

/// Sample [`analytic_time`] on a uniform grid whose origin sits at `t_origin`
/// on the record's clock.
pub fn analytic_field(
    p: &AnalyticModelParams,
    t_origin: f64,
    t_start: f64,
    dt: f64,
    n: usize,
) -> Result<FieldRecord> {
    let values = (0..n)
        .map(|i| analytic_time(p, t_start + i as f64 * dt - t_origin))
        .collect();
    FieldRecord::new(f64::NAN, t_start, dt, values)
}

/// Fourier coefficient c_n = (1/T_rep) int_0^t_on sin(omega_qb t) exp(-i n 2 pi t / T_rep) dt.
///
/// Closed form k / (2 pi (k - n)(k + n)) [1 - exp(-i m pi (n/k + 1))] with
/// k = T_rep / T_QB and t_on = m T_QB / 2; at n = +-k the integral is
/// evaluated by quadrature.
pub fn fourier_coefficient(n: i64, t_rep: f64, t_on: f64, omega_qb: f64) -> Result<Complex64> {
    if !(omega_qb > 0.0 && t_rep > 0.0) {
        return Err(Error::invalid("omega_qb and t_rep must be positive"));
    }
    let m = half_period_multiple(t_on, omega_qb)?;
    if t_rep < t_on * (1.0 - 1e-12) {
        return Err(Error::invalid(format!(
            "repetition period {t_rep} is shorter than the lobe {t_on}"
        )));
    }
    let k = t_rep * omega_qb / (2.0 * PI);
    let nf = n as f64;
    if (nf - k).abs() < SINGULAR_WINDOW || (nf + k).abs() < SINGULAR_WINDOW {
        let w = 2.0 * PI * nf / t_rep;
        let integral = quadrature::integrate(
            |t| (omega_qb * t).sin() * Complex64::new(0.0, -w * t).exp(),
            0.0,
            t_on,
            4 * m as usize,
            20,
        );
        return Ok(integral / t_rep);
    }
    let bracket = Complex64::new(1.0, 0.0)
        - Complex64::new(0.0, -(m as f64) * PI * (nf / k + 1.0)).exp();
    Ok(bracket * (k / (2.0 * PI * (k - nf) * (k + nf))))
}

/// (index, weight, tooth position) of every retained comb term.
fn comb_terms(p: &AnalyticModelParams, truncation: Truncation) -> Result<Vec<(f64, Complex64)>> {
    let (t_rep, odd_only, weight) = match p.scheme {
        AnalyticScheme::Regular => (2.0 * p.period(), true, 2.0),
        AnalyticScheme::Inverted => (p.period(), false, 1.0),
        AnalyticScheme::Constant => unreachable!("constant scheme has no comb"),
    };
    let k = t_rep / p.t_qb();
    let coeff = |n: i64| fourier_coefficient(n, t_rep, p.t_on, p.omega_qb);
    let included = |n: i64| !odd_only || n.rem_euclid(2) == 1;

    let n_max = match truncation {
        Truncation::Fixed(n) => n as i64,
        Truncation::Auto => {
            let probe = (2.0 * k).ceil() as i64 + 2;
            let mut largest = 0.0f64;
            for n in -probe..=probe {
                if included(n) {
                    largest = largest.max(coeff(n)?.norm());
                }
            }
            // |c_n| <= k / (pi (n^2 - k^2)) beyond the singular points.
            let need = (k * k + k / (PI * TAIL_TOLERANCE * largest)).sqrt().ceil() as i64;
            need.max(MIN_TERMS as i64)
        }
    };
    let step = 2.0 * PI / t_rep;
    let mut out = Vec::new();
    for n in -n_max..=n_max {
        if included(n) {
            out.push((n as f64 * step, weight * coeff(n)?));
        }
    }
    Ok(out)
}

/// Closed-form spectrum on `omega_grid`, rad/ns.
pub fn analytic_spectrum(
    p: &AnalyticModelParams,
    omega_grid: &[f64],
    truncation: Truncation,
) -> Result<SpectrumRecord> {
    p.validate()?;
    if omega_grid.is_empty() {
        return Err(Error::invalid("empty frequency grid"));
    }
    let half_gamma = 0.5 * p.gamma;
    let lorentz = |w: f64, center: f64| Complex64::new(half_gamma, w - center).inv();
    let values: Vec<Complex64> = match p.scheme {
        AnalyticScheme::Constant => omega_grid
            .iter()
            .map(|&w| {
                (lorentz(w, p.omega_qb) - lorentz(w, -p.omega_qb)) / Complex64::new(0.0, 2.0)
                    * p.amplitude
            })
            .collect(),
        _ => {
            let terms = comb_terms(p, truncation)?;
            omega_grid
                .iter()
                .map(|&w| {
                    terms
                        .iter()
                        .map(|&(center, c)| c * lorentz(w, center))
                        .sum::<Complex64>()
                        * p.amplitude
                })
                .collect()
        }
    };
    let resolution = if omega_grid.len() > 1 {
        omega_grid[1] - omega_grid[0]
    } else {
        f64::NAN
    };
    Ok(SpectrumRecord {
        omega: omega_grid.to_vec(),
        values,
        window: None,
        resolution,
        source: SpectrumSource::Analytic,
    })
}
