//! CHROM chrominance-based pulse extraction.
//!
//! Channels are normalised by their window means and projected onto two
//! chrominance axes, `X = 3R - 2G` and `Y = 1.5R + G - 1.5B`. After band-pass
//! filtering, `S = X - (σX/σY)·Y` cancels the specular and intensity
//! components common to both axes.

use crate::combine::RgbTrace;
use crate::heartrate::Passband;
use crate::numeric;
use crate::{Error, Result};

/// Minimum trace duration accepted by [`chrom`].
pub const MIN_TRACE_S: f64 = 2.0;

/// Blood-volume proxy for one analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseWaveform {
    samples: Vec<f64>,
    fps: f64,
}

impl PulseWaveform {
    pub fn new(samples: Vec<f64>, fps: f64) -> Self {
        Self { samples, fps }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

pub fn chrom(trace: &RgbTrace, passband: &Passband) -> Result<PulseWaveform> {
    let fps = trace.fps();
    let n = trace.len();
    let min = (MIN_TRACE_S * fps).ceil() as usize;
    if n < min {
        return Err(Error::TraceTooShort { len: n, min });
    }
    let filter = passband.filter(fps)?;

    let mut means = [0.0; 3];
    for (c, m) in means.iter_mut().enumerate() {
        *m = numeric::sum(trace.samples().iter().map(|s| s[c])) / n as f64;
        if !(*m > 0.0) {
            return Err(Error::ZeroChannelMean(c));
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace
        .samples()
        .iter()
        .map(|s| {
            let r = s[0] / means[0];
            let g = s[1] / means[1];
            let b = s[2] / means[2];
            (3.0 * r - 2.0 * g, 1.5 * r + g - 1.5 * b)
        })
        .unzip();
    let xf = filter.filtfilt(&xs);
    let yf = filter.filtfilt(&ys);

    let sy = numeric::std_dev(&yf);
    let alpha = if sy < 1e-12 { 0.0 } else { numeric::std_dev(&xf) / sy };
    let mut s: Vec<f64> = xf.iter().zip(&yf).map(|(x, y)| x - alpha * y).collect();
    let mean = numeric::mean(&s);
    s.iter_mut().for_each(|v| *v -= mean);
    Ok(PulseWaveform::new(s, fps))
}
