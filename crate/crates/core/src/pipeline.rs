//! End-to-end heart-rate estimation over overlapping windows.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chrom::{chrom, PulseWaveform};
use crate::combine::{
    combine_benchmark_snr, combine_proposed, facial_aggregate, final_weights, grid_traces, snr_weights, WeightMap,
};
use crate::diffuse::{self, DiffuseMethod};
use crate::heartrate::{window_hr, HrConfig, HrEstimate, WindowPlan};
use crate::ingest::{FaceLandmarks, FrameSequence, LandmarkSidecar, Rect};
use crate::roi::{build_grid, frame_mask, smooth_boxes, Bitmap};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineMethod {
    /// Mean of all skin pixels.
    Aggregate,
    /// SNR-weighted average of per-cell pulses.
    Snr,
    /// SNR × diffuse weighted RGB, then one pulse extraction.
    #[default]
    Proposed,
}

impl CombineMethod {
    pub const ALL: [CombineMethod; 3] = [CombineMethod::Aggregate, CombineMethod::Snr, CombineMethod::Proposed];

    pub fn label(self) -> &'static str {
        match self {
            CombineMethod::Aggregate => "aggregate",
            CombineMethod::Snr => "snr",
            CombineMethod::Proposed => "proposed",
        }
    }
}

impl fmt::Display for CombineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CombineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub method: CombineMethod,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub window_s: f64,
    pub hop_s: f64,
    pub diffuse: DiffuseMethod,
    pub bbox_smoothing: Option<f64>,
    pub hr: HrConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: CombineMethod::default(),
            grid_rows: 8,
            grid_cols: 8,
            window_s: 10.0,
            hop_s: 5.0,
            diffuse: DiffuseMethod::default(),
            bbox_smoothing: None,
            hr: HrConfig::default(),
        }
    }
}

/// Outcome of one analysis window. Weight maps are present for the
/// grid-based methods; `diffuse_weights` and `final_weights` only for the
/// proposed one.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub start_s: f64,
    pub bpm: f64,
    pub pulse: PulseWaveform,
    pub snr_weights: Option<WeightMap>,
    pub diffuse_weights: Option<WeightMap>,
    pub final_weights: Option<WeightMap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub windows: Vec<WindowResult>,
    pub estimate: HrEstimate,
}

/// Landmarks with the face box optionally smoothed over time.
fn effective_landmarks(seq: &FrameSequence, landmarks: &LandmarkSidecar, smoothing: Option<f64>) -> Vec<FaceLandmarks> {
    match smoothing {
        Some(alpha) => {
            let boxes: Vec<Rect> = landmarks.entries().iter().map(|e| e.bbox).collect();
            landmarks
                .entries()
                .iter()
                .zip(smooth_boxes(&boxes, alpha, seq.width(), seq.height()))
                .map(|(e, bbox)| FaceLandmarks { bbox, ..e.clone() })
                .collect()
        }
        None => landmarks.entries().to_vec(),
    }
}

pub fn estimate(seq: &FrameSequence, landmarks: &LandmarkSidecar, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    if landmarks.len() != seq.len() {
        return Err(Error::CountMismatch {
            records: landmarks.len(),
            frames: seq.len(),
        });
    }
    if let Some(alpha) = cfg.bbox_smoothing {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("bbox smoothing {alpha} is not in [0, 1)")));
        }
    }
    let plan = WindowPlan::new(seq.len(), seq.fps(), cfg.window_s, cfg.hop_s)?;
    if plan.is_empty() {
        return Err(Error::NoWindows);
    }
    let entries = effective_landmarks(seq, landmarks, cfg.bbox_smoothing);
    let (w, h) = (seq.width(), seq.height());
    let mut diffuse_cache: HashMap<usize, Vec<f32>> = HashMap::new();
    let mut windows = Vec::with_capacity(plan.len());

    for (range, start_s) in plan.ranges().zip(plan.starts_s()) {
        let frames = &seq.frames()[range.clone()];
        let masks: Vec<Bitmap> = entries[range.clone()].iter().map(|e| frame_mask(w, h, e)).collect();
        let mut result = WindowResult {
            start_s,
            bpm: f64::NAN,
            pulse: PulseWaveform::new(Vec::new(), seq.fps()),
            snr_weights: None,
            diffuse_weights: None,
            final_weights: None,
        };
        result.pulse = match cfg.method {
            CombineMethod::Aggregate => chrom(&facial_aggregate(frames, &masks, seq.fps())?, &cfg.hr.passband)?,
            CombineMethod::Snr | CombineMethod::Proposed => {
                let grid = build_grid(entries[range.start].bbox, cfg.grid_rows, cfg.grid_cols)?;
                let traces = grid_traces(frames, &masks, &grid, seq.fps());
                let snr = snr_weights(&traces, &cfg.hr)?;
                let pulse = if cfg.method == CombineMethod::Snr {
                    combine_benchmark_snr(&traces, &snr, &cfg.hr.passband)?
                } else {
                    diffuse_cache.retain(|&i, _| i >= range.start);
                    let missing: Vec<usize> = range.clone().filter(|i| !diffuse_cache.contains_key(i)).collect();
                    let fresh = diffuse::luminance_maps(
                        &missing.iter().map(|&i| &seq.frames()[i]).collect::<Vec<_>>(),
                        cfg.diffuse,
                    );
                    diffuse_cache.extend(missing.into_iter().zip(fresh));
                    let maps: Vec<&[f32]> = range.clone().map(|i| diffuse_cache[&i].as_slice()).collect();
                    let dw = diffuse::diffuse_weights_from_luminance(&maps, w, &grid, &masks)?;
                    let fw = final_weights(&traces, &snr, &dw)?;
                    let rgb = combine_proposed(&traces, &snr, &dw)?;
                    result.diffuse_weights = Some(dw);
                    result.final_weights = Some(fw);
                    chrom(&rgb, &cfg.hr.passband)?
                };
                result.snr_weights = Some(snr);
                pulse
            }
        };
        result.bpm = window_hr(&result.pulse, &cfg.hr)?;
        windows.push(result);
    }
    let estimate = HrEstimate::from_windows(windows.iter().map(|w| w.bpm).collect());
    Ok(PipelineOutput { windows, estimate })
}
