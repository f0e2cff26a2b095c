//! Closed-form Fourier coefficients of a gated sine against quadrature.
//!
//! `cargo run --release --example fourier_coefficients`

use std::f64::consts::PI;

use nfs_comb::analytic::fourier_coefficient;
use nfs_comb::quadrature::integrate;
use nfs_comb::Result;
use num_complex::Complex64;

fn main() -> Result<()> {
    // One beat period of 2 pi, switched on for half of it; the cycle is m
    // half periods long.
    let w = 1.0;
    let t_on = PI;
    println!("{:>2} {:>3} {:>24} {:>10}", "m", "n", "c_n", "|diff|");
    for m in [2u32, 3, 4] {
        let t_rep = m as f64 * PI;
        for n in -3i64..=3 {
            let c = fourier_coefficient(n, t_rep, t_on, w)?;
            let k = 2.0 * PI * n as f64 / t_rep;
            let q = integrate(|t| (w * t).sin() * Complex64::new(0.0, -k * t).exp(), 0.0, t_on, 16, 20) / t_rep;
            println!("{m:>2} {n:>3} {:>11.7}{:+.7}i {:>10.1e}", c.re, c.im, (c - q).norm());
        }
    }
    Ok(())
}
