//! Nuclear and target constants, unit conventions and derived beat quantities.
//!
//! All frequencies are angular and carried in rad/ns; times are in ns.
//! A value quoted elsewhere as "GHz" for this system is therefore Grad/s.
//! The 14.413 keV transition energy never enters a computation: the solver
//! works in a frame rotating at the zero-field transition frequency, where the
//! two driven hyperfine lines sit at detunings of +-Delta_B/2.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Natural decay rate of the 14.4 keV level, 1/(141 ns).
pub const GAMMA_57FE: f64 = 1.0 / 141.0;
/// Hyperfine field at the nuclear site in FeBO3, tesla.
pub const B_REF_TESLA: f64 = 34.4;
/// Splitting of the two Delta m = 0 lines at [`B_REF_TESLA`], rad/ns.
pub const DELTA_B_REF: f64 = 0.4691;

/// Clebsch-Gordan weight of both Delta m = 0 lines of a 1/2 -> 3/2 M1 transition.
pub fn default_cg_weight() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

/// Physical constants of the effective four-level target.
///
/// Levels 1 and 2 are the ground sublevels m_g = -1/2 and +1/2, levels 4 and 3
/// the excited sublevels they couple to. Transition 2 -> 3 carries sign +1,
/// transition 1 -> 4 sign -1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsModel {
    /// Decay rate, rad/ns.
    pub gamma: f64,
    /// Reference field, tesla.
    pub b_ref: f64,
    /// Splitting at `b_ref`, rad/ns.
    pub delta_b_ref: f64,
    /// Optical thickness.
    pub xi: f64,
    /// Sample length; only `xi * gamma / length` enters the dynamics.
    pub length: f64,
    pub c32: f64,
    pub c41: f64,
    pub sign32: f64,
    pub sign41: f64,
}

impl Default for PhysicsModel {
    fn default() -> Self {
        let c = default_cg_weight();
        PhysicsModel {
            gamma: GAMMA_57FE,
            b_ref: B_REF_TESLA,
            delta_b_ref: DELTA_B_REF,
            xi: 0.5,
            length: 1.0,
            c32: c,
            c41: c,
            sign32: 1.0,
            sign41: -1.0,
        }
    }
}

impl PhysicsModel {
    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.gamma, "gamma")?;
        positive(self.b_ref, "b_ref")?;
        positive(self.delta_b_ref, "delta_b_ref")?;
        positive(self.length, "length")?;
        if !(self.xi.is_finite() && self.xi >= 0.0) {
            return Err(Error::invalid(format!("xi must be >= 0, got {}", self.xi)));
        }
        if (self.c32.abs() - self.c41.abs()).abs() > 1e-12 * self.c32.abs().max(1.0) {
            return Err(Error::invalid(
                "the two Delta m = 0 lines need equal Clebsch-Gordan magnitudes",
            ));
        }
        if self.sign32.abs() != 1.0 || self.sign41.abs() != 1.0 {
            return Err(Error::invalid("sign factors must be +1 or -1"));
        }
        if self.sign32 * self.sign41 != -1.0 {
            return Err(Error::invalid("sign factors of m_g = +-1/2 must differ"));
        }
        Ok(())
    }

    /// Coupling constant of the wave equation, eta = xi * gamma / L.
    pub fn eta(&self) -> f64 {
        self.xi * self.gamma / self.length
    }
}

/// Beat quantities at a fixed operating field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatQuantities {
    /// Hyperfine splitting, rad/ns.
    pub delta_b: f64,
    /// Quantum-beat angular frequency, delta_b / 2.
    pub omega_qb: f64,
    /// Quantum-beat period 4 pi / delta_b (two intensity lobes), ns.
    pub t_qb: f64,
    /// Wave-equation coupling, rad/ns per length.
    pub eta: f64,
}

impl BeatQuantities {
    /// Spacing of adjacent intensity minima, T_QB / 2.
    pub fn half_period(&self) -> f64 {
        0.5 * self.t_qb
    }
}

/// Splitting of the two driven lines at field `b` (tesla); linear in `b`.
pub fn hyperfine_splitting(model: &PhysicsModel, b: f64) -> Result<f64> {
    if !b.is_finite() || b < 0.0 {
        return Err(Error::invalid(format!("field must be >= 0 T, got {b}")));
    }
    Ok(model.delta_b_ref * (b / model.b_ref))
}

pub fn beat_quantities(model: &PhysicsModel, b: f64) -> Result<BeatQuantities> {
    let delta_b = hyperfine_splitting(model, b)?;
    if delta_b == 0.0 {
        return Err(Error::invalid("no beat at zero field"));
    }
    Ok(BeatQuantities {
        delta_b,
        omega_qb: 0.5 * delta_b,
        t_qb: 4.0 * PI / delta_b,
        eta: model.eta(),
    })
}

/// Comb tooth spacing 2 pi / (t_on + t_off) produced by periodic switching.
pub fn peak_spacing_prediction(t_on: f64, t_off: f64) -> Result<f64> {
    if !(t_on.is_finite() && t_off.is_finite()) || t_on < 0.0 || t_off < 0.0 {
        return Err(Error::invalid(format!(
            "switching intervals must be non-negative, got t_on={t_on}, t_off={t_off}"
        )));
    }
    let period = t_on + t_off;
    if period <= 0.0 {
        return Err(Error::invalid("t_on + t_off must be positive"));
    }
    Ok(2.0 * PI / period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model() -> PhysicsModel {
        PhysicsModel::default()
    }

    #[test]
    fn splitting_at_reference_field() {
        assert_relative_eq!(hyperfine_splitting(&model(), 34.4).unwrap(), 0.4691);
        assert_eq!(hyperfine_splitting(&model(), 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            hyperfine_splitting(&model(), 17.2).unwrap(),
            0.23455,
            epsilon = 1e-12
        );
        assert!(matches!(
            hyperfine_splitting(&model(), -1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn reference_splitting_matches_g_factors() {
        // (g_g - g_e) mu_N B / hbar with mu_N in eV/T and hbar in eV ns.
        let (g_g, g_e, mu_n, hbar) = (0.1806, -0.1023, 3.152_451_e-8, 6.582_119_569e-7);
        let delta = (g_g - g_e) * mu_n * 34.4 / hbar;
        assert!((delta - DELTA_B_REF).abs() / DELTA_B_REF < 0.01, "delta = {delta}");
    }

    #[test]
    fn beat_at_reference_field() {
        let beat = beat_quantities(&model(), 34.4).unwrap();
        assert_relative_eq!(beat.omega_qb, 0.23455, epsilon = 1e-12);
        assert_relative_eq!(beat.t_qb, 4.0 * PI / 0.4691, epsilon = 1e-12);
        assert!((beat.t_qb - 26.79).abs() < 5e-3);
        assert_relative_eq!(beat.t_qb * beat.omega_qb, 2.0 * PI, epsilon = 1e-12);
        assert_relative_eq!(beat.eta, 0.5 / 141.0, epsilon = 1e-15);
        assert!(beat_quantities(&model(), 0.0).is_err());
    }

    #[test]
    fn spacing_prediction_examples() {
        let beat = beat_quantities(&model(), 34.4).unwrap();
        let half = beat.half_period();
        assert_relative_eq!(
            peak_spacing_prediction(half, half).unwrap(),
            0.23455,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            peak_spacing_prediction(half, 3.0 * half).unwrap(),
            PI / beat.t_qb,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            peak_spacing_prediction(half, 0.0).unwrap(),
            beat.delta_b,
            epsilon = 1e-12
        );
        assert!(peak_spacing_prediction(0.0, 0.0).is_err());
    }

    #[test]
    fn default_model_is_valid() {
        model().validate().unwrap();
        let mut bad = model();
        bad.sign41 = 1.0;
        assert!(bad.validate().is_err());
        bad = model();
        bad.c41 = 0.5;
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn splitting_is_homogeneous(b in 0.0f64..100.0, alpha in 0.0f64..10.0) {
            let m = model();
            let lhs = hyperfine_splitting(&m, alpha * b).unwrap();
            let rhs = alpha * hyperfine_splitting(&m, b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn spacing_symmetric_and_decreasing(a in 0.1f64..100.0, b in 0.0f64..100.0, extra in 0.01f64..10.0) {
            let s = peak_spacing_prediction(a, b).unwrap();
            prop_assert!((s - peak_spacing_prediction(b, a).unwrap()).abs() < 1e-9 * s);
            prop_assert!(peak_spacing_prediction(a, b + extra).unwrap() < s);
        }
    }
}
