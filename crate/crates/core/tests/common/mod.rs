//! Shared helpers and independent oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use nfs_comb::RunConfig;

pub fn cfg(overrides: &[&str]) -> RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::with_overrides(&o).expect("valid overrides")
}

/// Adaptive Simpson quadrature of a complex integrand.
pub fn simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> Complex64>(
        f: &F,
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    ) -> Complex64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.norm() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// (1/T) int_0^t_on sin(w t) exp(-i 2 pi n t / T) dt by adaptive Simpson on
/// irregular panels, so no sample set lands on the integrand's zeros.
pub fn coefficient_oracle(n: i64, t_rep: f64, t_on: f64, w: f64) -> Complex64 {
    let kw = 2.0 * PI * n as f64 / t_rep;
    let f = |t: f64| (w * t).sin() * Complex64::new((kw * t).cos(), -(kw * t).sin());
    let panels = 37;
    let edges: Vec<f64> = (0..=panels)
        .map(|j| {
            let x = j as f64 / panels as f64;
            t_on * (x + 0.01 * (PI * x).sin())
        })
        .collect();
    edges
        .windows(2)
        .map(|e| simpson(&f, e[0], e[1], 1e-15))
        .sum::<Complex64>()
        / t_rep
}

/// Distance from `x` to the nearest element of `set`.
pub fn nearest(set: &[f64], x: f64) -> f64 {
    set.iter().map(|s| (s - x).abs()).fold(f64::INFINITY, f64::min)
}
