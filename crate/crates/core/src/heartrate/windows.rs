use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{bandpass, psd, select_hr, suppress_artifacts, HrConfig};
use crate::chrom::PulseWaveform;
use crate::numeric;
use crate::{Error, Result};

/// Overlapping analysis windows over a frame sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    fps: f64,
    window_len: usize,
    starts: Vec<usize>,
}

impl WindowPlan {
    /// Windows of `window_s` seconds every `hop_s` seconds that fit entirely
    /// inside `frame_count` frames.
    pub fn new(frame_count: usize, fps: f64, window_s: f64, hop_s: f64) -> Result<Self> {
        if !(fps > 0.0) {
            return Err(Error::NonPositiveFps(fps));
        }
        let window_len = (window_s * fps).round() as usize;
        let hop_len = (hop_s * fps).round() as usize;
        if window_len == 0 || hop_len == 0 {
            return Err(Error::InvalidParameter(format!(
                "window {window_s} s / hop {hop_s} s at {fps} fps"
            )));
        }
        let starts = (0..)
            .map(|i| i * hop_len)
            .take_while(|s| s + window_len <= frame_count)
            .collect();
        Ok(Self {
            fps,
            window_len,
            starts,
        })
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn starts_s(&self) -> Vec<f64> {
        self.starts.iter().map(|&s| s as f64 / self.fps).collect()
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.starts.iter().map(|&s| s..s + self.window_len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrEstimate {
    pub per_window_bpm: Vec<f64>,
    pub video_bpm: f64,
}

/// Heart rate of one window's pulse waveform.
pub fn window_hr(wave: &PulseWaveform, cfg: &HrConfig) -> Result<f64> {
    let filtered = bandpass(wave, &cfg.passband)?;
    let spectrum = suppress_artifacts(&psd(&filtered)?, &cfg.notch_hz, cfg.notch_halfwidth_hz);
    select_hr(&spectrum, cfg)
}

/// Per-window heart rates and their mean.
pub fn estimate_video_hr(windows: &[PulseWaveform], cfg: &HrConfig) -> Result<HrEstimate> {
    if windows.is_empty() {
        return Err(Error::NoWindows);
    }
    let per_window_bpm = windows
        .iter()
        .map(|w| window_hr(w, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(HrEstimate::from_windows(per_window_bpm))
}

impl HrEstimate {
    pub fn from_windows(per_window_bpm: Vec<f64>) -> Self {
        Self {
            video_bpm: numeric::mean(&per_window_bpm),
            per_window_bpm,
        }
    }
}
