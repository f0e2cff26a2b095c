use serde::{Deserialize, Serialize};

use super::SpectrumRecord;
use crate::error::{Error, Result};

pub const DEFAULT_REL_THRESHOLD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// rad/ns
    pub position: f64,
    /// Interpolated power at the maximum.
    pub height: f64,
    /// Full width at half maximum, rad/ns; absent when a half-power crossing
    /// falls outside the grid.
    pub fwhm: Option<f64>,
}

/// Local power maxima above `rel_threshold` of the global maximum.
///
/// Positions and heights come from a parabola through log-power at the three
/// samples around each maximum; widths from linearly interpolated half-power
/// crossings.
pub fn find_peaks(spec: &SpectrumRecord, rel_threshold: f64) -> Result<Vec<Peak>> {
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(Error::invalid(format!(
            "rel_threshold must lie in (0, 1), got {rel_threshold}"
        )));
    }
    let p = spec.power();
    if p.len() < 3 {
        return Ok(Vec::new());
    }
    let global = p.iter().cloned().fold(0.0f64, f64::max);
    if global <= 0.0 {
        return Ok(Vec::new());
    }
    let floor = rel_threshold * global;
    let step = spec.grid_step();
    let mut peaks = Vec::new();
    for j in 1..p.len() - 1 {
        if !(p[j] > p[j - 1] && p[j] >= p[j + 1] && p[j] >= floor) {
            continue;
        }
        let (ym, y0, yp) = (p[j - 1].ln(), p[j].ln(), p[j + 1].ln());
        let denom = ym - 2.0 * y0 + yp;
        let (offset, log_height) = if denom < 0.0 && denom.is_finite() {
            let d = 0.5 * (ym - yp) / denom;
            (d, y0 - 0.25 * (ym - yp) * d)
        } else {
            (0.0, y0)
        };
        let height = log_height.exp();
        let position = spec.omega[j] + offset * step;
        peaks.push(Peak {
            position,
            height,
            fwhm: half_width(&p, &spec.omega, j, 0.5 * height),
        });
    }
    peaks.sort_by(|a, b| a.position.total_cmp(&b.position));
    Ok(peaks)
}

fn half_width(p: &[f64], omega: &[f64], j: usize, half: f64) -> Option<f64> {
    let cross = |a: usize, b: usize| {
        let frac = (p[a] - half) / (p[a] - p[b]);
        omega[a] + frac * (omega[b] - omega[a])
    };
    let mut l = j;
    while l > 0 && p[l - 1] >= half {
        l -= 1;
    }
    if l == 0 {
        return None;
    }
    let left = cross(l, l - 1);
    let mut r = j;
    while r + 1 < p.len() && p[r + 1] >= half {
        r += 1;
    }
    if r + 1 == p.len() {
        return None;
    }
    let right = cross(r, r + 1);
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumSource;
    use num_complex::Complex64;

    fn spectrum(omega: Vec<f64>, f: impl Fn(f64) -> Complex64) -> SpectrumRecord {
        let values = omega.iter().map(|&w| f(w)).collect();
        let step = omega[1] - omega[0];
        SpectrumRecord {
            omega,
            values,
            window: None,
            resolution: step,
            source: SpectrumSource::Analytic,
        }
    }

    #[test]
    fn lorentzian_fwhm_is_gamma() {
        let gamma = 1.0 / 141.0;
        let grid: Vec<f64> = (-2000..=2000).map(|i| i as f64 * 1e-4 + 3.3e-5).collect();
        let s = spectrum(grid, |w| Complex64::new(0.5 * gamma, w - 0.01).inv());
        let peaks = find_peaks(&s, 0.02).unwrap();
        assert_eq!(peaks.len(), 1);
        let fwhm = peaks[0].fwhm.unwrap();
        assert!((fwhm - gamma).abs() / gamma < 0.02, "fwhm = {fwhm}");
        assert!((peaks[0].position - 0.01).abs() < 0.5e-4);
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let s = spectrum(grid, |_| Complex64::new(1.0, 0.0));
        assert!(find_peaks(&s, 0.02).unwrap().is_empty());
    }

    #[test]
    fn threshold_filters_small_peaks() {
        let g = 0.01;
        let grid: Vec<f64> = (-1000..=1000).map(|i| i as f64 * 1e-3).collect();
        let s = spectrum(grid, |w| {
            Complex64::new(g, w - 0.3).inv() + 0.1 * Complex64::new(g, w + 0.3).inv()
        });
        assert_eq!(find_peaks(&s, 0.02).unwrap().len(), 1);
        assert_eq!(find_peaks(&s, 0.005).unwrap().len(), 2);
        assert!(find_peaks(&s, 0.0).is_err());
        assert!(find_peaks(&s, 1.0).is_err());
    }
}
