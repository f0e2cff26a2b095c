//! Four-level density matrix and the Bloch right-hand side.
//!
//! Index 0 and 1 are the ground sublevels m_g = -1/2 and +1/2 (levels 1, 2);
//! index 2 and 3 the excited sublevels (levels 3, 4). The field couples
//! 2 <-> 3 and 1 <-> 4.

use num_complex::Complex64;

use super::SolverMode;
use crate::physics::PhysicsModel;

pub const G1: usize = 0;
pub const G2: usize = 1;
pub const E3: usize = 2;
pub const E4: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub [[Complex64; 4]; 4]);

impl DensityMatrix {
    pub fn zeros() -> Self {
        DensityMatrix([[ZERO; 4]; 4])
    }

    /// Ground sublevels equally populated, no coherences.
    pub fn initial() -> Self {
        let mut m = Self::zeros();
        m.0[G1][G1] = Complex64::new(0.5, 0.0);
        m.0[G2][G2] = Complex64::new(0.5, 0.0);
        m
    }

    pub fn rho32(&self) -> Complex64 {
        self.0[E3][G2]
    }

    pub fn rho41(&self) -> Complex64 {
        self.0[E4][G1]
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// max |rho_ij - conj(rho_ji)|
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in i..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn as_flat(&self) -> [Complex64; 16] {
        let mut out = [ZERO; 16];
        for i in 0..4 {
            out[4 * i..4 * i + 4].copy_from_slice(&self.0[i]);
        }
        out
    }

    pub fn from_flat(flat: &[Complex64]) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i].copy_from_slice(&flat[4 * i..4 * i + 4]);
        }
        m
    }
}

/// d(rho)/dt for one slice.
///
/// `omega` is the local field envelope, `f` the modulation value and
/// `delta_b` the splitting at full field. In [`SolverMode::Linear`] the
/// populations are frozen.
pub fn bloch_rhs(
    rho: &DensityMatrix,
    omega: Complex64,
    f: f64,
    delta_b: f64,
    model: &PhysicsModel,
    mode: SolverMode,
) -> DensityMatrix {
    let flat = rho.as_flat();
    let mut out = [ZERO; 16];
    bloch_rhs_flat(&flat, &mut out, omega, f, delta_b, model, mode);
    DensityMatrix::from_flat(&out)
}

/// Same as [`bloch_rhs`] on a row-major 16-element slice.
pub(crate) fn bloch_rhs_flat(
    rho: &[Complex64],
    out: &mut [Complex64],
    omega: Complex64,
    f: f64,
    delta_b: f64,
    model: &PhysicsModel,
    mode: SolverMode,
) {
    let at = |i: usize, j: usize| rho[4 * i + j];
    let half_gamma = 0.5 * model.gamma;

    // Rotating frame at the zero-field line: the hyperfine shift sits on the
    // excited sublevels as detunings -+ f delta_b / 2.
    let d32 = -0.5 * f * delta_b;
    let d41 = 0.5 * f * delta_b;
    let v32 = -0.5 * model.sign32 * model.c32 * omega;
    let v41 = -0.5 * model.sign41 * model.c41 * omega;

    // Sparse Hamiltonian entries (row, col, value).
    let h = [
        (E3, E3, Complex64::new(d32, 0.0)),
        (E4, E4, Complex64::new(d41, 0.0)),
        (E3, G2, v32),
        (G2, E3, v32.conj()),
        (E4, G1, v41),
        (G1, E4, v41.conj()),
    ];

    for v in out.iter_mut() {
        *v = ZERO;
    }
    // -i [H, rho]
    for &(a, b, hv) in &h {
        let c = -I * hv;
        for j in 0..4 {
            out[4 * a + j] += c * at(b, j);
        }
        for i in 0..4 {
            out[4 * i + b] -= c * at(i, a);
        }
    }
    // Spontaneous decay: every excited level at rate gamma.
    let excited = [0.0, 0.0, 1.0, 1.0];
    for i in 0..4 {
        for j in 0..4 {
            let rate = half_gamma * (excited[i] + excited[j]);
            if rate != 0.0 {
                out[4 * i + j] -= rate * at(i, j);
            }
        }
    }
    match mode {
        SolverMode::Linear => {
            for i in 0..4 {
                out[5 * i] = ZERO;
            }
        }
        SolverMode::Full => {
            let branch = (model.c32 * model.c32).clamp(0.0, 1.0);
            let (p3, p4) = (at(E3, E3), at(E4, E4));
            out[5 * G2] += model.gamma * (branch * p3 + (1.0 - branch) * p4);
            out[5 * G1] += model.gamma * (branch * p4 + (1.0 - branch) * p3);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{hyperfine_splitting, PhysicsModel};

    fn model() -> PhysicsModel {
        PhysicsModel::default()
    }

    #[test]
    fn storage_is_pure_decay() {
        let mut rho = DensityMatrix::initial();
        let c = Complex64::new(0.3, -0.2);
        rho.0[E3][G2] = c;
        rho.0[G2][E3] = c.conj();
        let d = bloch_rhs(&rho, ZERO, 0.0, 0.4691, &model(), SolverMode::Linear);
        let expected = -0.5 * model().gamma * c;
        assert!((d.rho32() - expected).norm() < 1e-15);
    }

    #[test]
    fn coherence_equations_match_closed_form() {
        let m = model();
        let delta = hyperfine_splitting(&m, 34.4).unwrap();
        let mut rho = DensityMatrix::initial();
        rho.0[E3][G2] = Complex64::new(0.1, 0.05);
        rho.0[E4][G1] = Complex64::new(-0.02, 0.07);
        rho.0[G2][E3] = rho.0[E3][G2].conj();
        rho.0[G1][E4] = rho.0[E4][G1].conj();
        let omega = Complex64::new(1e-3, 2e-4);
        let f = 0.7;
        let d = bloch_rhs(&rho, omega, f, delta, &m, SolverMode::Linear);
        let d32 = -0.5 * f * delta;
        let d41 = 0.5 * f * delta;
        let want32 = -(0.5 * m.gamma + I * d32) * rho.rho32()
            + 0.5 * I * m.sign32 * m.c32 * omega * (rho.0[G2][G2] - rho.0[E3][E3]);
        let want41 = -(0.5 * m.gamma + I * d41) * rho.rho41()
            + 0.5 * I * m.sign41 * m.c41 * omega * (rho.0[G1][G1] - rho.0[E4][E4]);
        assert!((d.rho32() - want32).norm() < 1e-15);
        assert!((d.rho41() - want41).norm() < 1e-15);
        // Linear mode freezes populations.
        for i in 0..4 {
            assert_eq!(d.0[i][i], ZERO);
        }
    }

    #[test]
    fn full_mode_conserves_trace_and_hermiticity() {
        let m = model();
        let mut rho = DensityMatrix::initial();
        rho.0[G1][G1] = Complex64::new(0.4, 0.0);
        rho.0[E3][E3] = Complex64::new(0.06, 0.0);
        rho.0[E4][E4] = Complex64::new(0.04, 0.0);
        rho.0[E3][G2] = Complex64::new(0.1, 0.05);
        rho.0[G2][E3] = rho.0[E3][G2].conj();
        let d = bloch_rhs(&rho, Complex64::new(0.3, 0.1), 1.0, 0.4691, &m, SolverMode::Full);
        assert!(d.trace().norm() < 1e-15);
        assert!(d.hermiticity_error() < 1e-15);
    }
}
