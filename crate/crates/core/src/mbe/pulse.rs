use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    /// exp(-(t - t_delay)^2 / tau^2)
    Gaussian,
    /// Amplitude exp(-(t - t_delay) / (2 tau)) for t >= t_delay: the field of
    /// a source line with intensity lifetime tau switched in at t_delay.
    ExponentialSource,
}

/// Resonant incident pulse at z = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentPulse {
    pub shape: PulseShape,
    /// Peak Rabi frequency, rad/ns.
    pub amplitude: f64,
    pub t_delay: f64,
    pub tau: f64,
}

impl IncidentPulse {
    pub fn gaussian(amplitude: f64, t_delay: f64, tau: f64) -> Self {
        IncidentPulse {
            shape: PulseShape::Gaussian,
            amplitude,
            t_delay,
            tau,
        }
    }

    /// Pulse of the given shape scaled to a total area (rad).
    pub fn with_area(shape: PulseShape, area: f64, t_delay: f64, tau: f64) -> Self {
        let unit = IncidentPulse {
            shape,
            amplitude: 1.0,
            t_delay,
            tau,
        };
        IncidentPulse {
            amplitude: area / unit.area(),
            ..unit
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::invalid("pulse amplitude must be positive"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("pulse tau must be positive"));
        }
        if self.shape == PulseShape::Gaussian && self.t_delay < 3.0 * self.tau {
            log::warn!(
                "gaussian pulse centre {} ns is closer than 3 tau to t = 0; the leading edge is cut",
                self.t_delay
            );
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let x = (t - self.t_delay) / self.tau;
        let v = match self.shape {
            PulseShape::Gaussian => (-x * x).exp(),
            PulseShape::ExponentialSource => {
                if x >= 0.0 {
                    (-0.5 * x).exp()
                } else {
                    0.0
                }
            }
        };
        Complex64::new(self.amplitude * v, 0.0)
    }

    /// Time integral of the envelope.
    pub fn area(&self) -> f64 {
        match self.shape {
            PulseShape::Gaussian => self.amplitude * self.tau * PI.sqrt(),
            PulseShape::ExponentialSource => 2.0 * self.amplitude * self.tau,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self.shape {
            PulseShape::Gaussian => Vec::new(),
            PulseShape::ExponentialSource => vec![self.t_delay],
        }
    }

    /// Instant after which the nuclear response is excited, used to place
    /// the first beat minimum.
    pub fn excitation_time(&self) -> f64 {
        self.t_delay
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_normalisation() {
        for shape in [PulseShape::Gaussian, PulseShape::ExponentialSource] {
            let p = IncidentPulse::with_area(shape, 0.01, 10.0, 1.0);
            // Trapezoid integral on a fine grid.
            let dt = 1e-3;
            let sum: f64 = (0..100_000).map(|i| p.eval(i as f64 * dt).re * dt).sum();
            assert!((sum - 0.01).abs() < 1e-5, "{shape:?}: {sum}");
        }
    }

    #[test]
    fn gaussian_peak_and_width() {
        let p = IncidentPulse::gaussian(2.0, 10.0, 1.0);
        assert_eq!(p.eval(10.0).re, 2.0);
        assert!((p.eval(11.0).re - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }
}
