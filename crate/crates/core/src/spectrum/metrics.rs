use serde::{Deserialize, Serialize};

use super::{Peak, SpectrumRecord};
use crate::error::{Error, Result};
use crate::record::FieldRecord;
use crate::switching::SwitchingSequence;

/// Spacing, periodicity and suppression figures of a comb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombMetrics {
    pub peaks: Vec<Peak>,
    /// Mean adjacent peak spacing, rad/ns (needs >= 3 peaks).
    pub mean_spacing: Option<f64>,
    /// Sample standard deviation of the spacings divided by their mean.
    pub spacing_rel_std: Option<f64>,
    /// Worst ratio of mean off-window intensity to the peak of the preceding
    /// on window.
    pub suppression_ratio: Option<f64>,
    /// Mean and sample std of the intervals between on-window intensity maxima, ns.
    pub repetition_period_mean: Option<f64>,
    pub repetition_period_std: Option<f64>,
    /// Mean peak power over the median power of the band spanned by the peaks.
    pub peak_contrast: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Time of the largest intensity sample in `[start, end)`, refined by a parabola.
fn window_maximum(field: &FieldRecord, intensity: &[f64], start: f64, end: f64) -> Option<(f64, f64)> {
    let lo = field.index_at_or_after(start);
    let hi = field.index_at_or_before(end)?;
    if hi <= lo + 2 || hi >= field.len() {
        return None;
    }
    let (imax, &pmax) = intensity[lo..hi]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let j = lo + imax;
    if j == 0 || j + 1 >= intensity.len() {
        return Some((field.time(j), pmax));
    }
    let (ym, y0, yp) = (intensity[j - 1], intensity[j], intensity[j + 1]);
    let denom = ym - 2.0 * y0 + yp;
    let d = if denom < 0.0 { 0.5 * (ym - yp) / denom } else { 0.0 };
    Some((field.time(j) + d * field.dt, pmax))
}

pub fn comb_metrics(
    peaks: &[Peak],
    spectrum: &SpectrumRecord,
    field: &FieldRecord,
    seq: &SwitchingSequence,
) -> CombMetrics {
    let mut m = CombMetrics {
        peaks: peaks.to_vec(),
        mean_spacing: None,
        spacing_rel_std: None,
        suppression_ratio: None,
        repetition_period_mean: None,
        repetition_period_std: None,
        peak_contrast: None,
    };

    if peaks.len() >= 3 {
        let spacings: Vec<f64> = peaks.windows(2).map(|w| w[1].position - w[0].position).collect();
        let (mean, std) = mean_std(&spacings);
        m.mean_spacing = Some(mean);
        m.spacing_rel_std = Some(std / mean);
    }

    if let (Some(first), Some(last)) = (peaks.first(), peaks.last()) {
        let band: Vec<f64> = spectrum
            .omega
            .iter()
            .zip(spectrum.power())
            .filter(|(w, _)| **w >= first.position && **w <= last.position)
            .map(|(_, p)| p)
            .collect();
        if !band.is_empty() {
            let bg = median(band);
            let mean_height = peaks.iter().map(|p| p.height).sum::<f64>() / peaks.len() as f64;
            if bg > 0.0 {
                m.peak_contrast = Some(mean_height / bg);
            }
        }
    }

    let t_end = field.t_max();
    let intensity = field.intensity();
    let on: Vec<(f64, f64)> = seq
        .on_windows(t_end)
        .into_iter()
        .filter(|&(_, e)| e <= t_end)
        .collect();
    if on.is_empty() {
        return m;
    }

    let maxima: Vec<(f64, f64)> = on
        .iter()
        .filter_map(|&(s, e)| window_maximum(field, &intensity, s, e))
        .collect();
    if maxima.len() >= 2 {
        let periods: Vec<f64> = maxima.windows(2).map(|w| w[1].0 - w[0].0).collect();
        let (mean, std) = mean_std(&periods);
        m.repetition_period_mean = Some(mean);
        m.repetition_period_std = Some(std);
    }

    // The lobe before the first switch-off counts as the on window preceding
    // the first storage interval.
    let t_on = on[0].1 - on[0].0;
    let t0 = seq.t0();
    let mut previous = window_maximum(field, &intensity, t0 - t_on, t0).map(|x| x.1);
    let mut worst: Option<f64> = None;
    for (k, &(off_start, off_end)) in seq.off_windows(t_end).iter().enumerate() {
        let lo = field.index_at_or_after(off_start);
        let hi = field.index_at_or_before(off_end);
        if let (Some(peak), Some(hi)) = (previous, hi) {
            // Skip the samples that sit exactly on the switching instants.
            let inner: Vec<f64> = (lo..=hi)
                .filter(|&i| field.time(i) > off_start && field.time(i) < off_end)
                .map(|i| intensity[i])
                .collect();
            if !inner.is_empty() && peak > 0.0 {
                let mean = inner.iter().sum::<f64>() / inner.len() as f64;
                let ratio = mean / peak;
                worst = Some(worst.map_or(ratio, |w: f64| w.max(ratio)));
            }
        }
        previous = on.get(k).and_then(|&(s, e)| window_maximum(field, &intensity, s, e)).map(|x| x.1);
    }
    m.suppression_ratio = worst;
    m
}

/// Exponential rate of `|Omega|^2` over `[t_from, t_to]` from a log-linear
/// least-squares fit, 1/ns.
pub fn fit_decay_rate(field: &FieldRecord, t_from: f64, t_to: f64) -> Result<f64> {
    let lo = field.index_at_or_after(t_from);
    let hi = field
        .index_at_or_before(t_to)
        .ok_or_else(|| Error::invalid("fit window precedes the record"))?;
    if hi <= lo + 2 {
        return Err(Error::invalid("fit window holds too few samples"));
    }
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in lo..=hi {
        let p = field.values[i].norm_sqr();
        if p <= 0.0 {
            return Err(Error::numerical("zero intensity inside the fit window"));
        }
        let (x, y) = (field.time(i), p.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1.0;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(-slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::switching::{Scheme, SwitchingSpec};
    use num_complex::Complex64;

    #[test]
    fn decay_fit_recovers_rate() {
        let rec = FieldRecord::new(
            0.0,
            0.0,
            0.1,
            (0..5000).map(|i| Complex64::new((-0.005 * i as f64 * 0.1).exp(), 0.0)).collect(),
        )
        .unwrap();
        let rate = fit_decay_rate(&rec, 10.0, 400.0).unwrap();
        assert!((rate - 0.01).abs() < 1e-12);
    }

    #[test]
    fn ideal_pulse_train_metrics() {
        // Half-sine lobes in the on windows, nothing in the off windows.
        let (t0, t_on, t_off) = (10.0, 5.0, 7.0);
        let seq = SwitchingSequence::new(
            SwitchingSpec {
                scheme: Scheme::Regular,
                t0,
                t_on,
                t_off,
                epsilon: None,
                jitter_fraction: None,
                seed: None,
            },
            200.0,
        )
        .unwrap();
        let dt = 0.01;
        let values: Vec<Complex64> = (0..20001)
            .map(|i| {
                let t = i as f64 * dt;
                let v = if t < t0 {
                    (std::f64::consts::PI * (t - t0) / t_on).sin()
                } else if seq.eval(t) != 0.0 {
                    let (s, _) = seq.on_window(
                        1 + ((t - t0 - t_off) / (t_on + t_off)).floor() as usize,
                    );
                    (std::f64::consts::PI * (t - s) / t_on).sin()
                } else {
                    1e-4
                };
                Complex64::new(v, 0.0)
            })
            .collect();
        let field = FieldRecord::new(0.0, 0.0, dt, values).unwrap();
        let spec = crate::spectrum::windowed_dft(&field, t0, 200.0).unwrap();
        let m = comb_metrics(&[], &spec, &field, &seq);
        assert!((m.repetition_period_mean.unwrap() - 12.0).abs() < 1e-6);
        assert!(m.repetition_period_std.unwrap() < 1e-6);
        let ratio = m.suppression_ratio.unwrap();
        assert!((ratio - 1e-8).abs() < 1e-9, "ratio = {ratio}");
        assert!(m.mean_spacing.is_none());
    }
}
