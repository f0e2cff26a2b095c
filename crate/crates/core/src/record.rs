//! Sampled field envelopes and their CSV form.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniformly sampled complex envelope Omega(z, t) at a fixed position, rad/ns.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRecord {
    pub z: f64,
    pub t_start: f64,
    pub dt: f64,
    pub values: Vec<Complex64>,
}

impl FieldRecord {
    pub fn new(z: f64, t_start: f64, dt: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        Ok(FieldRecord {
            z,
            t_start,
            dt,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Index of the first sample at or after `t`.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let x = (t - self.t_start) / self.dt;
        let i = (x - 1e-9).ceil().max(0.0) as usize;
        i.min(self.len())
    }

    /// Index of the last sample at or before `t`.
    pub fn index_at_or_before(&self, t: f64) -> Option<usize> {
        let x = (t - self.t_start) / self.dt;
        if x < -1e-9 {
            return None;
        }
        Some(((x + 1e-9).floor() as usize).min(self.len().saturating_sub(1)))
    }

    pub fn scaled(&self, factor: Complex64) -> FieldRecord {
        FieldRecord {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Write `t_ns,re_omega,im_omega,intensity`, preceded by `#` comment lines.
    /// Field values use the shortest exact representation so a reread is lossless.
    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "t_ns,re_omega,im_omega,intensity")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(
                out,
                "{:.6},{:e},{:e},{:.12e}",
                self.time(i),
                v.re,
                v.im,
                v.norm_sqr()
            )?;
        }
        Ok(())
    }

    /// Parse the CSV produced by [`FieldRecord::write_csv`]. The grid must be uniform.
    pub fn read_csv<R: Read>(input: R) -> Result<FieldRecord> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::invalid(format!("field CSV lacks column {name}")))
        };
        let (ct, cre, cim) = (col("t_ns")?, col("re_omega")?, col("im_omega")?);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for row in reader.records() {
            let row = row?;
            let num = |c: usize| -> Result<f64> {
                row.get(c)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid(format!("bad number in row {row:?}")))
            };
            times.push(num(ct)?);
            values.push(Complex64::new(num(cre)?, num(cim)?));
        }
        if times.len() < 2 {
            return Err(Error::invalid("field CSV needs at least two samples"));
        }
        let n = times.len() - 1;
        let dt = (times[n] - times[0]) / n as f64;
        for (i, t) in times.iter().enumerate() {
            if (t - (times[0] + i as f64 * dt)).abs() > 1e-5 + 1e-6 * dt {
                return Err(Error::invalid(format!("field CSV time grid is not uniform at row {i}")));
            }
        }
        FieldRecord::new(f64::NAN, times[0], dt, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_preserves_samples() {
        let rec = FieldRecord::new(
            1.0,
            0.0,
            0.05,
            (0..50).map(|i| Complex64::new(i as f64 * 1e-3, -(i as f64).sin())).collect(),
        )
        .unwrap();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf, &["config_hash: abc".into()]).unwrap();
        let back = FieldRecord::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), rec.len());
        assert!((back.dt - rec.dt).abs() < 1e-9);
        for (a, b) in back.values.iter().zip(&rec.values) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn index_lookup() {
        let rec = FieldRecord::new(0.0, 0.0, 0.5, vec![Complex64::new(0.0, 0.0); 10]).unwrap();
        assert_eq!(rec.index_at_or_after(1.0), 2);
        assert_eq!(rec.index_at_or_after(1.1), 3);
        assert_eq!(rec.index_at_or_before(1.1), Some(2));
        assert_eq!(rec.index_at_or_before(-1.0), None);
        assert_eq!(rec.t_max(), 4.5);
    }

    #[test]
    fn rejects_ragged_grid() {
        let csv = "t_ns,re_omega,im_omega,intensity\n0,1,0,1\n1,1,0,1\n3,1,0,1\n";
        assert!(FieldRecord::read_csv(csv.as_bytes()).is_err());
    }
}
