//! Dimensionless field modulation f(t), with B(t) = B0 * f(t).
//!
//! All stepwise schemes share one window layout: the field is on (f = 1)
//! until `t0`, then alternates between an off interval of length `t_off` and
//! an on window of length `t_on`. On window `i` (counting from 1) covers
//! `[t0 + t_off + (i - 1)(t_on + t_off), t0 + i (t_on + t_off))`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::BeatQuantities;

/// Beyond this many smoothing radii the tanh tails are below f64 resolution.
const SMOOTH_REACH: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Constant,
    Off,
    Regular,
    Inverted,
    RegularSmoothed,
    Sinusoidal,
    RegularRandomized,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Constant => "constant",
            Scheme::Off => "off",
            Scheme::Regular => "regular",
            Scheme::Inverted => "inverted",
            Scheme::RegularSmoothed => "regular-smoothed",
            Scheme::Sinusoidal => "sinusoidal",
            Scheme::RegularRandomized => "regular-randomized",
        }
    }

    fn is_periodic(self) -> bool {
        !matches!(self, Scheme::Constant | Scheme::Off)
    }
}

/// Declarative switching parameters, as read from a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSpec {
    pub scheme: Scheme,
    pub t0: f64,
    pub t_on: f64,
    pub t_off: f64,
    pub epsilon: Option<f64>,
    pub jitter_fraction: Option<f64>,
    pub seed: Option<u64>,
}

/// An evaluable switching sequence.
///
/// Construction validates the parameters and, for the randomized scheme,
/// draws every off interval up to `horizon`, so evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSequence {
    spec: SwitchingSpec,
    /// Cumulative deviation of window starts from the periodic layout,
    /// one entry per on window (randomized scheme only).
    jitter_offsets: Vec<f64>,
    max_drift: f64,
}

impl SwitchingSequence {
    pub fn constant() -> Self {
        Self::new(
            SwitchingSpec {
                scheme: Scheme::Constant,
                t0: 0.0,
                t_on: 1.0,
                t_off: 0.0,
                epsilon: None,
                jitter_fraction: None,
                seed: None,
            },
            0.0,
        )
        .expect("constant sequence is always valid")
    }

    pub fn new(spec: SwitchingSpec, horizon: f64) -> Result<Self> {
        validate(&spec)?;
        let mut jitter_offsets = Vec::new();
        if spec.scheme == Scheme::RegularRandomized {
            let jitter = spec.jitter_fraction.unwrap_or(0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(0));
            let period = spec.t_on + spec.t_off;
            let mut offset = 0.0;
            let mut start = spec.t0;
            while start <= horizon {
                let u: f64 = rng.gen();
                let drawn = spec.t_off * (1.0 + jitter * (2.0 * u - 1.0));
                offset += drawn - spec.t_off;
                jitter_offsets.push(offset);
                start += period + (drawn - spec.t_off);
            }
        }
        let max_drift = jitter_offsets.iter().fold(0.0f64, |m, o| m.max(o.abs()));
        Ok(SwitchingSequence {
            spec,
            jitter_offsets,
            max_drift,
        })
    }

    pub fn spec(&self) -> &SwitchingSpec {
        &self.spec
    }

    pub fn scheme(&self) -> Scheme {
        self.spec.scheme
    }

    pub fn t0(&self) -> f64 {
        self.spec.t0
    }

    fn period(&self) -> f64 {
        self.spec.t_on + self.spec.t_off
    }

    fn jitter_offset(&self, i: usize) -> f64 {
        if self.spec.scheme != Scheme::RegularRandomized || i == 0 {
            return 0.0;
        }
        match self.jitter_offsets.get(i - 1) {
            Some(&o) => o,
            None => self.jitter_offsets.last().copied().unwrap_or(0.0),
        }
    }

    /// Start and end of on window `i` (1-based).
    pub fn on_window(&self, i: usize) -> (f64, f64) {
        let s = &self.spec;
        let start = s.t0 + s.t_off + (i as f64 - 1.0) * self.period() + self.jitter_offset(i);
        (start, start + s.t_on)
    }

    /// On windows that start before `t_end`; empty for non-switching schemes.
    pub fn on_windows(&self, t_end: f64) -> Vec<(f64, f64)> {
        if !matches!(
            self.spec.scheme,
            Scheme::Regular | Scheme::Inverted | Scheme::RegularSmoothed | Scheme::RegularRandomized
        ) {
            return Vec::new();
        }
        (1..)
            .map(|i| self.on_window(i))
            .take_while(|&(start, _)| start < t_end)
            .collect()
    }

    /// Off intervals `[t0 or end of previous on window, start of next on window)`.
    pub fn off_windows(&self, t_end: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut prev_end = self.spec.t0;
        for (start, end) in self.on_windows(t_end) {
            out.push((prev_end, start));
            prev_end = end;
        }
        out
    }

    /// Index of the on window containing `t`, if any.
    fn window_index(&self, t: f64) -> Option<usize> {
        let s = &self.spec;
        if t < s.t0 + s.t_off {
            return None;
        }
        let guess = ((t - s.t0 - s.t_off) / self.period()).floor() as i64 + 1;
        // The randomized layout can drift from the periodic guess; scan nearby.
        let reach = if s.scheme == Scheme::RegularRandomized {
            (self.max_drift / self.period()).ceil() as i64 + 1
        } else {
            1
        };
        ((guess - reach).max(1)..=guess + reach).find_map(|i| {
            let i = i as usize;
            let (start, end) = self.on_window(i);
            (t >= start && t < end).then_some(i)
        })
    }

    /// Evaluate f(t).
    pub fn eval(&self, t: f64) -> f64 {
        let s = &self.spec;
        match s.scheme {
            Scheme::Constant => 1.0,
            Scheme::Off => {
                if t < s.t0 {
                    1.0
                } else {
                    0.0
                }
            }
            Scheme::Regular | Scheme::RegularRandomized => {
                if t < s.t0 || self.window_index(t).is_some() {
                    1.0
                } else {
                    0.0
                }
            }
            Scheme::Inverted => {
                if t < s.t0 {
                    1.0
                } else {
                    match self.window_index(t) {
                        Some(i) => 1.0 - 2.0 * (i % 2) as f64,
                        None => 0.0,
                    }
                }
            }
            Scheme::RegularSmoothed => {
                if t < s.t0 {
                    return 1.0;
                }
                let eps = s.epsilon.expect("validated");
                let reach = 0.5 + SMOOTH_REACH * eps;
                let x0 = (t - s.t0 - s.t_off) / s.t_on;
                let scale = self.period() / s.t_on;
                let lo = (((x0 - reach) / scale).floor() as i64).max(0);
                let hi = ((x0 + reach) / scale).ceil() as i64;
                let sum: f64 = (lo..=hi)
                    .map(|j| smooth_rect_unchecked(x0 - j as f64 * scale - 0.5, eps))
                    .sum();
                sum.min(1.0)
            }
            Scheme::Sinusoidal => {
                let omega = PI / s.t_on;
                // Modulation period is 2 t_on, so a quarter period is t_on / 2.
                let t_start = s.t0 - 0.5 * s.t_on;
                if t < t_start {
                    1.0
                } else {
                    0.5 * (1.0 - (omega * (t - s.t0)).sin())
                }
            }
        }
    }

    /// Instants where f or its derivative is discontinuous, up to `t_end`.
    pub fn breakpoints(&self, t_end: f64) -> Vec<f64> {
        let s = &self.spec;
        let mut out = Vec::new();
        match s.scheme {
            Scheme::Constant => {}
            Scheme::Off | Scheme::RegularSmoothed => out.push(s.t0),
            Scheme::Sinusoidal => out.push(s.t0 - 0.5 * s.t_on),
            Scheme::Regular | Scheme::Inverted | Scheme::RegularRandomized => {
                out.push(s.t0);
                for (start, end) in self.on_windows(t_end) {
                    out.push(start);
                    out.push(end);
                }
            }
        }
        out.retain(|&b| b > 0.0 && b < t_end);
        out.dedup();
        out
    }

    /// True when f is constant between consecutive breakpoints.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(
            self.spec.scheme,
            Scheme::Constant
                | Scheme::Off
                | Scheme::Regular
                | Scheme::Inverted
                | Scheme::RegularRandomized
        )
    }
}

fn validate(s: &SwitchingSpec) -> Result<()> {
    let finite = [s.t0, s.t_on, s.t_off].iter().all(|v| v.is_finite());
    if !finite {
        return Err(Error::config("switching times must be finite"));
    }
    if s.scheme.is_periodic() {
        if s.t_on <= 0.0 {
            return Err(Error::config(format!("t_on must be positive, got {}", s.t_on)));
        }
        if s.t_off < 0.0 {
            return Err(Error::config(format!("t_off must be >= 0, got {}", s.t_off)));
        }
    }
    match (s.scheme, s.epsilon) {
        (Scheme::RegularSmoothed, Some(e)) if e > 0.0 && e.is_finite() => {}
        (Scheme::RegularSmoothed, _) => {
            return Err(Error::config("regular-smoothed needs epsilon > 0"));
        }
        (_, Some(_)) => {
            return Err(Error::config(format!(
                "epsilon only applies to regular-smoothed, not {}",
                s.scheme.name()
            )));
        }
        _ => {}
    }
    match (s.scheme, s.jitter_fraction) {
        (Scheme::RegularRandomized, Some(j)) if (0.0..=1.0).contains(&j) => {}
        (Scheme::RegularRandomized, _) => {
            return Err(Error::config(
                "regular-randomized needs jitter_fraction in [0, 1]",
            ));
        }
        (_, Some(_)) => {
            return Err(Error::config(format!(
                "jitter_fraction only applies to regular-randomized, not {}",
                s.scheme.name()
            )));
        }
        _ => {}
    }
    if s.seed.is_some() && s.scheme != Scheme::RegularRandomized {
        return Err(Error::config("seed only applies to regular-randomized"));
    }
    if s.scheme == Scheme::Sinusoidal && (s.t_on - s.t_off).abs() > 1e-9 * s.t_on {
        return Err(Error::config("sinusoidal modulation requires t_on = t_off"));
    }
    Ok(())
}

/// Warn when `t_on` is not a multiple of half the beat period; switching off
/// between beat minima leaks signal during storage.
pub fn check_on_interval(t_on: f64, beat: &BeatQuantities) -> bool {
    let m = t_on / beat.half_period();
    let ok = m >= 0.5 && (m - m.round()).abs() < 1e-6;
    if !ok {
        log::warn!(
            "t_on = {t_on} ns is {m:.4} half beat periods; suppression needs an integer multiple"
        );
    }
    ok
}

fn smooth_rect_unchecked(x: f64, eps: f64) -> f64 {
    if x < 0.0 {
        0.5 * (1.0 + ((x + 0.5) / eps).tanh())
    } else {
        0.5 * (1.0 - ((x - 0.5) / eps).tanh())
    }
}

/// Rectangle function with tanh-smoothed edges of radius `epsilon`.
pub fn smoothed_rect(x: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(smooth_rect_unchecked(x, epsilon))
}

/// First intensity minimum of the forward-scattered beat after an excitation
/// at `t_excite`.
///
/// The two lines are excited in phase, so the scattered amplitude behaves
/// like cos(omega_qb (t - t_excite)) and its first zero lies a quarter beat
/// period after the excitation.
pub fn first_beat_minimum(beat: &BeatQuantities, t_excite: f64) -> f64 {
    t_excite + 0.25 * beat.t_qb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{beat_quantities, PhysicsModel};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn beat() -> BeatQuantities {
        beat_quantities(&PhysicsModel::default(), 34.4).unwrap()
    }

    fn spec(scheme: Scheme, t0: f64, t_on: f64, t_off: f64) -> SwitchingSpec {
        SwitchingSpec {
            scheme,
            t0,
            t_on,
            t_off,
            epsilon: None,
            jitter_fraction: None,
            seed: None,
        }
    }

    fn seq(s: SwitchingSpec) -> SwitchingSequence {
        SwitchingSequence::new(s, 2410.0).unwrap()
    }

    #[test]
    fn regular_examples() {
        let h = beat().half_period();
        let t0 = 16.7;
        let f = seq(spec(Scheme::Regular, t0, h, h));
        assert_eq!(f.eval(t0 / 2.0), 1.0);
        assert_eq!(f.eval(t0 + h / 2.0), 0.0);
        assert_eq!(f.eval(t0 + h + h / 2.0), 1.0);
        assert_eq!(f.eval(t0 + 2.0 * h + h / 2.0), 0.0);
        // Left edge belongs to the window.
        let (start, end) = f.on_window(1);
        assert_eq!(f.eval(start), 1.0);
        assert_eq!(f.eval(end), 0.0);
    }

    #[test]
    fn inverted_examples() {
        let h = beat().half_period();
        let t0 = 16.7;
        let f = seq(spec(Scheme::Inverted, t0, h, h));
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(t0 + h + h / 2.0), -1.0);
        assert_eq!(f.eval(t0 + 3.0 * h + h / 2.0), 1.0);
        assert_eq!(f.eval(t0 + 5.0 * h + h / 2.0), -1.0);
        assert_eq!(f.eval(t0 + 2.0 * h + h / 2.0), 0.0);
    }

    #[test]
    fn sinusoidal_examples() {
        let b = beat();
        let t0 = 16.7;
        let f = seq(spec(Scheme::Sinusoidal, t0, b.half_period(), b.half_period()));
        let t_tilde = t0 - b.t_qb / 4.0;
        assert_relative_eq!(f.eval(t_tilde), 1.0, epsilon = 1e-12);
        assert_eq!(f.eval(t_tilde - 1.0), 1.0);
        assert_relative_eq!(f.eval(t0 + b.t_qb / 4.0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(f.eval(t0), 0.5, epsilon = 1e-12);
        assert!(SwitchingSequence::new(spec(Scheme::Sinusoidal, t0, 1.0, 2.0), 100.0).is_err());
    }

    #[test]
    fn smoothed_rect_examples() {
        assert_relative_eq!(smoothed_rect(0.0, 0.01).unwrap(), 1.0, epsilon = 1e-12);
        assert!(smoothed_rect(50.0, 0.1).unwrap() < 1e-300);
        assert!(smoothed_rect(-50.0, 0.1).unwrap() < 1e-300);
        assert_relative_eq!(smoothed_rect(0.25, 1e-4).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(smoothed_rect(-0.25, 1e-4).unwrap(), 1.0, epsilon = 1e-12);
        assert!(smoothed_rect(0.0, 0.0).is_err());
        assert!(smoothed_rect(0.0, -1.0).is_err());
    }

    #[test]
    fn first_minimum_is_quarter_period_after_excitation() {
        let b = beat();
        assert_relative_eq!(first_beat_minimum(&b, 10.0), 10.0 + PI / 0.4691, epsilon = 1e-12);
        assert_relative_eq!(first_beat_minimum(&b, 0.0), b.t_qb / 4.0);
        let doubled = beat_quantities(&PhysicsModel::default(), 68.8).unwrap();
        assert_relative_eq!(
            first_beat_minimum(&doubled, 0.0),
            0.5 * first_beat_minimum(&b, 0.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn parameter_mismatch_is_rejected() {
        let mut s = spec(Scheme::Regular, 10.0, 5.0, 5.0);
        s.epsilon = Some(0.1);
        assert!(matches!(SwitchingSequence::new(s, 100.0), Err(Error::Config(_))));
        let mut s = spec(Scheme::Inverted, 10.0, 5.0, 5.0);
        s.jitter_fraction = Some(0.1);
        assert!(SwitchingSequence::new(s, 100.0).is_err());
        let s = spec(Scheme::RegularSmoothed, 10.0, 5.0, 5.0);
        assert!(SwitchingSequence::new(s, 100.0).is_err());
        let s = spec(Scheme::Regular, 10.0, 0.0, 5.0);
        assert!(SwitchingSequence::new(s, 100.0).is_err());
    }

    #[test]
    fn breakpoints_cover_every_switch() {
        let f = seq(spec(Scheme::Regular, 10.0, 5.0, 5.0));
        let bp = f.breakpoints(40.0);
        assert_eq!(bp, vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0]);
    }

    #[test]
    fn smoothed_tends_to_regular() {
        let h = beat().half_period();
        let regular = seq(spec(Scheme::Regular, 16.7, h, h));
        let mut s = spec(Scheme::RegularSmoothed, 16.7, h, h);
        s.epsilon = Some(1e-3);
        let smooth = seq(s);
        for k in 0..400 {
            let t = 16.7 + 0.37 * k as f64 + 0.011;
            let near_jump = regular
                .breakpoints(400.0)
                .iter()
                .any(|&b| (t - b).abs() < 0.05 * h);
            if !near_jump {
                assert_relative_eq!(smooth.eval(t), regular.eval(t), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn check_on_interval_flags_bad_multiples() {
        let b = beat();
        assert!(check_on_interval(b.half_period(), &b));
        assert!(check_on_interval(3.0 * b.half_period(), &b));
        assert!(!check_on_interval(0.7 * b.half_period(), &b));
    }

    proptest! {
        #[test]
        fn f_stays_in_range(t in 0.0f64..500.0, scheme_idx in 0usize..7, eps in 0.01f64..0.5) {
            let h = beat().half_period();
            let schemes = [Scheme::Constant, Scheme::Off, Scheme::Regular, Scheme::Inverted,
                Scheme::RegularSmoothed, Scheme::Sinusoidal, Scheme::RegularRandomized];
            let mut s = spec(schemes[scheme_idx], 16.7, h, h);
            match s.scheme {
                Scheme::RegularSmoothed => s.epsilon = Some(eps),
                Scheme::RegularRandomized => { s.jitter_fraction = Some(0.3); s.seed = Some(3); }
                _ => {}
            }
            let f = seq(s);
            let v = f.eval(t);
            prop_assert!((-1.0..=1.0).contains(&v));
            if t < 16.7 - h / 2.0 {
                prop_assert_eq!(v, 1.0);
            }
        }

        #[test]
        fn inverted_envelope_matches_regular(t in 0.0f64..800.0, t_off_frac in 0.0f64..4.0) {
            let h = beat().half_period();
            let r = seq(spec(Scheme::Regular, 16.7, h, t_off_frac * h));
            let i = seq(spec(Scheme::Inverted, 16.7, h, t_off_frac * h));
            prop_assert_eq!(i.eval(t).abs(), r.eval(t));
        }

        #[test]
        fn zero_jitter_is_regular(t in 0.0f64..2400.0, seed in 0u64..1000) {
            let h = beat().half_period();
            let r = seq(spec(Scheme::Regular, 16.7, h, 3.0 * h));
            let mut s = spec(Scheme::RegularRandomized, 16.7, h, 3.0 * h);
            s.jitter_fraction = Some(0.0);
            s.seed = Some(seed);
            let z = seq(s);
            prop_assert_eq!(z.eval(t).to_bits(), r.eval(t).to_bits());
        }

        #[test]
        fn same_seed_same_sequence(seed in 0u64..1000) {
            let h = beat().half_period();
            let mut s = spec(Scheme::RegularRandomized, 16.7, h, h);
            s.jitter_fraction = Some(0.3);
            s.seed = Some(seed);
            let a = seq(s.clone());
            let b = seq(s);
            prop_assert_eq!(a.on_windows(2410.0), b.on_windows(2410.0));
        }
    }

    #[test]
    fn randomized_off_intervals_stay_in_band() {
        let h = beat().half_period();
        let mut s = spec(Scheme::RegularRandomized, 16.7, h, h);
        s.jitter_fraction = Some(0.3);
        s.seed = Some(42);
        let f = seq(s);
        let offs = f.off_windows(2410.0);
        assert!(offs.len() > 50);
        let mut distinct = false;
        for (a, b) in &offs {
            let len = b - a;
            assert!(len >= 0.7 * h - 1e-9 && len <= 1.3 * h + 1e-9, "len = {len}");
            distinct |= (len - h).abs() > 1e-3;
        }
        assert!(distinct);
        for (start, end) in f.on_windows(2410.0) {
            assert_eq!(f.eval(0.5 * (start + end)), 1.0);
        }
    }
}
