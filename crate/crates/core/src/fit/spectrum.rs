use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FitError;

/// Amplitude spectral density on a frequency grid, optionally with per-point
/// standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredSpectrum {
    /// Strictly increasing frequencies [Hz].
    pub freq_hz: Vec<f64>,
    /// Positive values (arbitrary units or N/sqrt(Hz)).
    pub asd: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl MeasuredSpectrum {
    pub fn new(
        freq_hz: Vec<f64>,
        asd: Vec<f64>,
        sigma: Option<Vec<f64>>,
    ) -> Result<Self, FitError> {
        if freq_hz.len() != asd.len() || sigma.as_ref().is_some_and(|s| s.len() != asd.len()) {
            return Err(FitError::InvalidData("column lengths differ".into()));
        }
        if let Some(i) = freq_hz
            .windows(2)
            .position(|w| w[0].is_nan() || w[1].is_nan() || w[1] <= w[0])
        {
            return Err(FitError::InvalidData(format!(
                "frequencies must be strictly increasing (row {})",
                i + 2
            )));
        }
        if freq_hz.iter().any(|f| !f.is_finite()) {
            return Err(FitError::InvalidData("non-finite frequency".into()));
        }
        if let Some(i) = asd.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(FitError::InvalidData(format!(
                "non-positive value at row {}",
                i + 1
            )));
        }
        if let Some(s) = &sigma {
            if let Some(i) = s.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(FitError::InvalidData(format!(
                    "non-positive sigma at row {}",
                    i + 1
                )));
            }
        }
        Ok(MeasuredSpectrum {
            freq_hz,
            asd,
            sigma,
        })
    }

    pub fn len(&self) -> usize {
        self.freq_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq_hz.is_empty()
    }

    /// Reads `freq_hz,<value_column>[,sigma]` CSV with a header row. Other
    /// columns are ignored, so a noise-budget file can be read by naming one
    /// of its spectrum columns.
    pub fn from_csv_reader<R: Read>(reader: R, value_column: &str) -> Result<Self, FitError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |name: &str| headers.iter().position(|h| h == name);
        let Some(fi) = find("freq_hz") else {
            if headers.is_empty() {
                return Ok(MeasuredSpectrum {
                    freq_hz: vec![],
                    asd: vec![],
                    sigma: None,
                });
            }
            return Err(FitError::InvalidData("missing `freq_hz` column".into()));
        };
        let vi = find(value_column)
            .ok_or_else(|| FitError::InvalidData(format!("missing `{value_column}` column")))?;
        let si = find("sigma");

        let (mut freq, mut val, mut sig) = (Vec::new(), Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64, FitError> {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| {
                        FitError::InvalidData(format!("unparsable number in row {}", row + 1))
                    })
            };
            freq.push(num(fi)?);
            val.push(num(vi)?);
            if let Some(si) = si {
                sig.push(num(si)?);
            }
        }
        Self::new(freq, val, si.map(|_| sig))
    }

    pub fn from_csv_path(path: impl AsRef<Path>, value_column: &str) -> Result<Self, FitError> {
        Self::from_csv_reader(std::fs::File::open(path)?, value_column)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), FitError> {
        let mut w = csv::Writer::from_writer(writer);
        match &self.sigma {
            Some(s) => {
                w.write_record(["freq_hz", "asd", "sigma"])?;
                for ((f, v), e) in self.freq_hz.iter().zip(&self.asd).zip(s) {
                    w.write_record([f.to_string(), v.to_string(), e.to_string()])?;
                }
            }
            None => {
                w.write_record(["freq_hz", "asd"])?;
                for (f, v) in self.freq_hz.iter().zip(&self.asd) {
                    w.write_record([f.to_string(), v.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
