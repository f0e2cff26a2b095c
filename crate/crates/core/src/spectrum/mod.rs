//! Windowed discrete Fourier transforms of field records and comb analysis.
//!
//! Convention: F(omega) = sum_i Omega(t_i) exp(-i omega (t_i - t_first)) dt,
//! so a component exp(+i w t) in the field shows up at omega = +w. The
//! frequency axis is centred on zero detuning.

mod metrics;
mod peaks;

pub use metrics::{comb_metrics, fit_decay_rate, CombMetrics};
pub use peaks::{find_peaks, Peak, DEFAULT_REL_THRESHOLD};

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::FieldRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSource {
    Numeric,
    Analytic,
}

/// Complex spectrum samples on a frequency grid, rad/ns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Transformed time interval, if the spectrum came from a field record.
    pub window: Option<(f64, f64)>,
    /// Native resolution 2 pi / window length (grid step for analytic spectra).
    pub resolution: f64,
    pub source: SpectrumSource,
}

impl SpectrumRecord {
    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn grid_step(&self) -> f64 {
        if self.omega.len() < 2 {
            return f64::NAN;
        }
        self.omega[1] - self.omega[0]
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Index of the grid point closest to `omega`.
    pub fn nearest_index(&self, omega: f64) -> usize {
        let step = self.grid_step();
        let i = ((omega - self.omega[0]) / step).round();
        i.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Value at `omega` by linear interpolation between grid points.
    pub fn interpolate(&self, omega: f64) -> Complex64 {
        let step = self.grid_step();
        let x = ((omega - self.omega[0]) / step).clamp(0.0, (self.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.len() - 2);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Write `omega_radns,re,im,power`, preceded by `#` comment lines.
    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "omega_radns,re,im,power")?;
        for (w, v) in self.omega.iter().zip(&self.values) {
            writeln!(out, "{:.9e},{:.12e},{:.12e},{:.12e}", w, v.re, v.im, v.norm_sqr())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DftOptions {
    /// Zero-padding factor (1 = none). Padding refines the grid, not the resolution.
    pub zero_pad: usize,
    /// Beat period used to warn about windows too short to resolve the comb.
    pub beat_period: Option<f64>,
}

impl Default for DftOptions {
    fn default() -> Self {
        DftOptions {
            zero_pad: 1,
            beat_period: None,
        }
    }
}

/// Rectangular-window DFT of `field` over `[t_start, t_end)`.
pub fn windowed_dft(field: &FieldRecord, t_start: f64, t_end: f64) -> Result<SpectrumRecord> {
    windowed_dft_with(field, t_start, t_end, &DftOptions::default())
}

pub fn windowed_dft_with(
    field: &FieldRecord,
    t_start: f64,
    t_end: f64,
    opts: &DftOptions,
) -> Result<SpectrumRecord> {
    if !(t_end > t_start) {
        return Err(Error::invalid(format!(
            "inverted or empty window [{t_start}, {t_end}]"
        )));
    }
    let tol = 1e-6 * field.dt;
    if t_start < field.t_start - tol || t_end > field.t_max() + tol {
        return Err(Error::invalid(format!(
            "window [{t_start}, {t_end}] exceeds the record [{}, {}]",
            field.t_start,
            field.t_max()
        )));
    }
    if opts.zero_pad == 0 {
        return Err(Error::invalid("zero_pad must be >= 1"));
    }
    let i0 = field.index_at_or_after(t_start);
    let i1 = field
        .index_at_or_before(t_end)
        .ok_or_else(|| Error::invalid("window precedes the record"))?;
    if i1 <= i0 + 1 {
        return Err(Error::invalid("window holds fewer than two samples"));
    }
    let m = i1 - i0;
    let length = m as f64 * field.dt;
    if let Some(period) = opts.beat_period {
        if length < 10.0 * period {
            log::warn!(
                "window of {length:.1} ns is shorter than 10 beat periods; comb teeth may not resolve"
            );
        }
    }

    let n = m * opts.zero_pad;
    let mut buf: Vec<Complex64> = field.values[i0..i1].to_vec();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let step = 2.0 * PI / (n as f64 * field.dt);
    let half = n / 2;
    let mut omega = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        // Centred index j holds signed frequency j - half.
        let signed = j as isize - half as isize;
        let k = (j + n - half) % n;
        omega.push(signed as f64 * step);
        values.push(buf[k] * field.dt);
    }
    let t_first = field.time(i0);
    Ok(SpectrumRecord {
        omega,
        values,
        window: Some((t_first, t_first + length)),
        resolution: 2.0 * PI / length,
        source: SpectrumSource::Numeric,
    })
}
