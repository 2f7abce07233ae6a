use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Observed sample `X_1, …, X_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("time series must not be empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite observation at index {i}")));
        }
        Ok(TimeSeries { values })
    }

    pub(crate) fn new_unchecked(values: Vec<f64>) -> Self {
        TimeSeries { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `s · X + shift`, elementwise.
    pub fn affine(&self, scale: f64, shift: f64) -> TimeSeries {
        TimeSeries::new_unchecked(self.values.iter().map(|x| scale * x + shift).collect())
    }

    /// Single-column CSV with header `x`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x")?;
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }

    /// Reads the first column of a CSV file; a non-numeric first line is
    /// treated as a header.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Config(format!("read error: {e}")))?;
            let field = line.split(',').next().unwrap_or("").trim();
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if lineno == 0 => continue,
                Err(_) => {
                    return Err(Error::Config(format!(
                        "line {}: cannot parse {field:?} as a number",
                        lineno + 1
                    )))
                }
            }
        }
        TimeSeries::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let x = TimeSeries::new(vec![1.5, -2.0, 3.25e-7]).unwrap();
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x\n"));
        let y = TimeSeries::read_csv(&buf[..]).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::read_csv(&b"x\n1\nfoo\n"[..]).is_err());
    }
}
