use std::f64::consts::PI;

use nfs_comb::record::FieldRecord;
use nfs_comb::spectrum::{find_peaks, windowed_dft, windowed_dft_with, DftOptions};
use num_complex::Complex64;
use proptest::prelude::*;

fn record(t_start: f64, dt: f64, values: Vec<Complex64>) -> FieldRecord {
    FieldRecord::new(0.0, t_start, dt, values).unwrap()
}

fn signal() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8..300)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

proptest! {
    #[test]
    fn parseval_holds(values in signal(), dt in 0.01f64..1.0) {
        let n = values.len();
        let r = record(0.0, dt, values);
        let s = windowed_dft(&r, 0.0, r.t_max()).unwrap();
        let time: f64 = r.values[..n - 1].iter().map(|v| v.norm_sqr()).sum::<f64>() * dt;
        let freq: f64 = s.power().iter().sum::<f64>() * s.grid_step() / (2.0 * PI);
        prop_assert!((time - freq).abs() <= 1e-10 * time.max(1e-300));
    }

    #[test]
    fn dft_is_linear(a in signal(), k in -3.0f64..3.0) {
        let n = a.len();
        let b: Vec<Complex64> = a.iter().enumerate().map(|(i, v)| v.conj() * (i as f64).sin()).collect();
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * k + y).collect();
        let fa = windowed_dft(&record(0.0, 0.5, a), 0.0, (n - 1) as f64 * 0.5).unwrap();
        let fb = windowed_dft(&record(0.0, 0.5, b), 0.0, (n - 1) as f64 * 0.5).unwrap();
        let fs = windowed_dft(&record(0.0, 0.5, sum), 0.0, (n - 1) as f64 * 0.5).unwrap();
        for j in 0..fs.len() {
            let expect = fa.values[j] * k + fb.values[j];
            prop_assert!((fs.values[j] - expect).norm() < 1e-9 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn shifting_the_window_start_is_a_pure_phase(values in signal(), shift in 1usize..40) {
        // Support sits inside both windows, so moving the start earlier by s
        // only changes the time reference: F -> exp(-i w s) F.
        let dt = 0.1;
        let z = Complex64::new(0.0, 0.0);
        let mut padded = vec![z; shift];
        padded.extend(values);
        padded.extend(std::iter::repeat_n(z, shift + 1));
        let n = padded.len();
        let r = record(0.0, dt, padded);
        let s = shift as f64 * dt;
        let late = windowed_dft(&r, s, (n - 1) as f64 * dt).unwrap();
        let early = windowed_dft(&r, 0.0, (n - 1) as f64 * dt - s).unwrap();
        for j in 0..late.len() {
            prop_assert!((late.omega[j] - early.omega[j]).abs() < 1e-12);
            let expect = late.values[j] * Complex64::new(0.0, -late.omega[j] * s).exp();
            prop_assert!((early.values[j] - expect).norm() < 1e-9 * (1.0 + expect.norm()));
            prop_assert!((early.values[j].norm_sqr() - late.values[j].norm_sqr()).abs() < 1e-9 * (1.0 + late.values[j].norm_sqr()));
        }
    }

    #[test]
    fn record_origin_does_not_change_values(values in signal(), t0 in -100.0f64..100.0) {
        let n = (values.len() - 1) as f64;
        let a = windowed_dft(&record(0.0, 0.25, values.clone()), 0.0, n * 0.25).unwrap();
        let b = windowed_dft(&record(t0, 0.25, values), t0, t0 + n * 0.25).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn zero_padding_keeps_native_samples(values in signal()) {
        let n = (values.len() - 1) as f64;
        let r = record(0.0, 0.2, values);
        let native = windowed_dft(&r, 0.0, n * 0.2).unwrap();
        let padded = windowed_dft_with(&r, 0.0, n * 0.2, &DftOptions { zero_pad: 4, beat_period: None }).unwrap();
        prop_assert!((native.resolution - padded.resolution).abs() < 1e-15);
        for (j, &w) in native.omega.iter().enumerate() {
            let k = padded.nearest_index(w);
            prop_assert!((padded.omega[k] - w).abs() < 1e-9);
            prop_assert!((padded.values[k] - native.values[j]).norm() < 1e-9 * (1.0 + native.values[j].norm()));
        }
    }

    #[test]
    fn lorentzian_peak_lands_on_the_tone(w in -1.0f64..1.0, gamma in 0.01f64..0.05) {
        let dt = 0.05;
        let n = 48_200;
        let vals: Vec<Complex64> = (0..n)
            .map(|i| (Complex64::new(-gamma / 2.0, w) * (i as f64 * dt)).exp())
            .collect();
        let r = record(0.0, dt, vals);
        let s = windowed_dft_with(&r, 0.0, r.t_max(), &DftOptions { zero_pad: 4, beat_period: None }).unwrap();
        let peaks = find_peaks(&s, 0.02).unwrap();
        prop_assert_eq!(peaks.len(), 1);
        prop_assert!((peaks[0].position - w).abs() < s.resolution / 4.0);
    }
}
