use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::numeric;
use crate::{Error, Result};

/// Reference signals recorded alongside a video.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// `(time_s, value)` contact PPG samples, possibly at a variable rate.
    pub ppg_samples: Vec<(f64, f64)>,
    /// `(time_s, bpm)` heart-rate numerics, roughly one per second.
    pub hr_numerics: Vec<(f64, f64)>,
}

impl GroundTruth {
    /// Video-level reference heart rate: mean of the numerics.
    pub fn mean_bpm(&self) -> Option<f64> {
        if self.hr_numerics.is_empty() {
            return None;
        }
        Some(numeric::sum(self.hr_numerics.iter().map(|s| s.1)) / self.hr_numerics.len() as f64)
    }

    /// Mean of the numerics whose timestamps fall in `[start_s, end_s)`.
    pub fn mean_bpm_between(&self, start_s: f64, end_s: f64) -> Option<f64> {
        let values: Vec<f64> = self
            .hr_numerics
            .iter()
            .filter(|(t, _)| *t >= start_s && *t < end_s)
            .map(|s| s.1)
            .collect();
        (!values.is_empty()).then(|| numeric::mean(&values))
    }

    /// PPG linearly interpolated onto a uniform grid starting at the first
    /// sample, `rate_hz` samples per second.
    pub fn resample_ppg(&self, rate_hz: f64) -> Vec<(f64, f64)> {
        let (Some(first), Some(last)) = (self.ppg_samples.first(), self.ppg_samples.last()) else {
            return Vec::new();
        };
        let xs: Vec<f64> = self.ppg_samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = self.ppg_samples.iter().map(|s| s.1).collect();
        let n = ((last.0 - first.0) * rate_hz).floor() as usize + 1;
        (0..n)
            .map(|k| {
                let t = first.0 + k as f64 / rate_hz;
                (t, numeric::interp_linear(&xs, &ys, t))
            })
            .collect()
    }
}

/// Read a `time_s,value` CSV. Timestamps must be strictly increasing.
pub fn load_signal_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    if !path.is_file() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::malformed(path.display().to_string(), e))?;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for (row, record) in reader.deserialize::<(f64, f64)>().enumerate() {
        let sample = record.map_err(|e| Error::malformed(path.display().to_string(), e))?;
        if let Some(prev) = samples.last() {
            if !(sample.0 > prev.0) {
                return Err(Error::NonMonotoneTime { row });
            }
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(samples)
}

/// Load heart-rate numerics and, optionally, the contact PPG trace.
pub fn load_ground_truth(hr_path: &Path, ppg_path: Option<&Path>) -> Result<GroundTruth> {
    let hr_numerics = load_signal_csv(hr_path)?;
    if let Some((row, &(_, bpm))) = hr_numerics
        .iter()
        .enumerate()
        .find(|(_, (_, bpm))| !(30.0..=240.0).contains(bpm))
    {
        return Err(Error::BpmOutOfRange { row, bpm });
    }
    let ppg_samples = match ppg_path {
        Some(p) => load_signal_csv(p)?,
        None => Vec::new(),
    };
    Ok(GroundTruth {
        ppg_samples,
        hr_numerics,
    })
}

pub fn write_signal_csv(path: &Path, samples: &[(f64, f64)]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "time_s,value")?;
        for (t, v) in samples {
            writeln!(out, "{t},{v}")?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
