//! Synthetic skin videos with known heart rate.
//!
//! Every frame shows a uniform skin patch whose colour is the camera
//! response to the reflectance model, with the blood fraction oscillating at
//! the heart rate. An optional additive highlight and a shot/read/rounding
//! noise model sit on top. Each frame draws from its own ChaCha stream, so
//! output does not depend on thread scheduling.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biophysics::{channel_reflectance, CameraNoiseParams, Channel, SkinParams, SpectralContext};
use crate::ingest::{
    write_frame_directory, write_landmarks, write_raw_stream, write_signal_csv, FaceLandmarks, FrameSequence,
    GroundTruth, LandmarkSidecar, Rect, RgbFrame,
};
use crate::{Error, Result};

pub const MIN_HR_BPM: f64 = 42.0;
pub const MAX_HR_BPM: f64 = 210.0;
/// Relative amplitude of the optional second pulse harmonic.
pub const HARMONIC_AMPLITUDE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Specular {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
    /// Added to every channel, in intensity levels.
    pub strength: f64,
}

impl Specular {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthScene {
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    pub duration_s: f64,
    pub hr_bpm: f64,
    /// Adds a second harmonic to the blood-volume waveform.
    pub pulse_harmonic: bool,
    /// Full-scale fraction: a perfect reflector renders at `255·exposure`.
    pub exposure: f64,
    pub skin: SkinParams,
    pub noise: CameraNoiseParams,
    /// Skip shot and read noise; values are still rounded to integers.
    pub noiseless: bool,
    pub specular: Option<Specular>,
    /// Maximum per-edge face-box jitter in pixels; 0 keeps the full frame.
    pub motion_px: u32,
    pub seed: u64,
}

impl Default for SynthScene {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            fps: 30.0,
            duration_s: 30.0,
            hr_bpm: 72.0,
            pulse_harmonic: false,
            exposure: 0.9,
            skin: SkinParams::default(),
            noise: CameraNoiseParams::default(),
            noiseless: false,
            specular: None,
            motion_px: 0,
            seed: 0,
        }
    }
}

impl SynthScene {
    pub fn frame_count(&self) -> usize {
        (self.duration_s * self.fps).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScene(msg));
        if self.width == 0 || self.height == 0 {
            return bad(format!("frame size {}x{}", self.width, self.height));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return bad(format!("fps {}", self.fps));
        }
        if !(self.duration_s > 0.0) || self.frame_count() == 0 {
            return bad(format!("duration {} s", self.duration_s));
        }
        if !(MIN_HR_BPM..=MAX_HR_BPM).contains(&self.hr_bpm) {
            return bad(format!("heart rate {} bpm outside [{MIN_HR_BPM}, {MAX_HR_BPM}]", self.hr_bpm));
        }
        if !(self.exposure > 0.0 && self.exposure <= 2.0) {
            return bad(format!("exposure {}", self.exposure));
        }
        self.skin.validate().or_else(|e| bad(e.to_string()))?;
        self.noise.validate().or_else(|e| bad(e.to_string()))?;
        if let Some(s) = &self.specular {
            if s.rect().is_empty() || !s.rect().fits_in(self.width, self.height) || !(s.strength >= 0.0) {
                return bad(format!("specular patch {s:?}"));
            }
        }
        if 5 * self.motion_px >= self.width.min(self.height) {
            return bad(format!("motion {} px is too large for the frame", self.motion_px));
        }
        Ok(())
    }

    /// Blood volume fraction at time `t`.
    pub fn f_blood(&self, t: f64) -> f64 {
        let phase = 2.0 * PI * self.hr_bpm / 60.0 * t;
        let mut wave = phase.sin();
        if self.pulse_harmonic {
            wave += HARMONIC_AMPLITUDE * (2.0 * phase).sin();
        }
        self.skin.f_blood + self.skin.delta_f_blood * wave
    }
}

/// A rendered scene.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub frames: FrameSequence,
    pub landmarks: LandmarkSidecar,
    pub ground_truth: GroundTruth,
}

pub fn render(scene: &SynthScene) -> Result<SynthOutput> {
    render_with(scene, &SpectralContext::default())
}

/// Noise-free channel intensities in levels for a blood fraction.
fn base_rgb(scene: &SynthScene, ctx: &SpectralContext, f_blood: f64) -> [f64; 3] {
    let params = SkinParams { f_blood, ..scene.skin };
    Channel::ALL.map(|c| 255.0 * scene.exposure * channel_reflectance(&params, ctx, c))
}

const JITTER_STREAM_OFFSET: u64 = 1 << 40;

pub fn render_with(scene: &SynthScene, ctx: &SpectralContext) -> Result<SynthOutput> {
    scene.validate()?;
    let n = scene.frame_count();
    let (w, h) = (scene.width, scene.height);
    let times: Vec<f64> = (0..n).map(|i| i as f64 / scene.fps).collect();
    let shot_read = (!scene.noiseless).then(|| {
        let sd = scene.noise.sigma_r / scene.noise.gain;
        (scene.noise.gain, Normal::new(0.0, sd).expect("finite read noise"))
    });

    let frames: Vec<RgbFrame> = (0..n)
        .into_par_iter()
        .map(|i| {
            let base = base_rgb(scene, ctx, scene.f_blood(times[i]));
            let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
            rng.set_stream(i as u64);
            let mut data = Vec::with_capacity(w as usize * h as usize * 3);
            for y in 0..h {
                for x in 0..w {
                    let lift = match &scene.specular {
                        Some(s) if s.rect().contains_pixel(x, y) => s.strength,
                        _ => 0.0,
                    };
                    for &level in &base {
                        let clean = (level + lift).min(255.0);
                        let noisy = match &shot_read {
                            Some((gain, read)) => {
                                let electrons = clean * gain;
                                let shot = if electrons > 0.0 {
                                    Poisson::new(electrons).expect("positive rate").sample(&mut rng)
                                } else {
                                    0.0
                                };
                                shot / gain + read.sample(&mut rng)
                            }
                            None => clean,
                        };
                        data.push(noisy.round().clamp(0.0, 255.0) as u8);
                    }
                }
            }
            RgbFrame::new(w, h, data).expect("consistent dimensions")
        })
        .collect();

    let entries: Vec<FaceLandmarks> = (0..n)
        .map(|i| {
            if scene.motion_px == 0 {
                return FaceLandmarks::full_frame(w, h);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
            rng.set_stream(JITTER_STREAM_OFFSET + i as u64);
            let mut jitter = || rng.random_range(0..=scene.motion_px);
            let (left, top, right, bottom) = (jitter(), jitter(), jitter(), jitter());
            FaceLandmarks {
                bbox: Rect::new(left, top, w - left - right, h - top - bottom),
                ..FaceLandmarks::full_frame(w, h)
            }
        })
        .collect();

    let ground_truth = GroundTruth {
        ppg_samples: times.iter().map(|&t| (t, scene.f_blood(t))).collect(),
        hr_numerics: (0..)
            .map(f64::from)
            .take_while(|&t| t < scene.duration_s)
            .map(|t| (t, scene.hr_bpm))
            .collect(),
    };
    Ok(SynthOutput {
        frames: FrameSequence::new(frames, scene.fps)?,
        landmarks: LandmarkSidecar::new(entries, n, w, h)?,
        ground_truth,
    })
}

pub const RAW_VIDEO_FILE: &str = "video.rppgraw";
pub const FRAMES_DIR: &str = "frames";
pub const LANDMARKS_FILE: &str = "landmarks.jsonl";
pub const GT_HR_FILE: &str = "gt_hr.csv";
pub const GT_PPG_FILE: &str = "gt_ppg.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VideoFormat {
    /// Single raw stream file.
    #[default]
    Raw,
    /// Directory of PPM frames with a manifest.
    Frames,
}

impl std::str::FromStr for VideoFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(VideoFormat::Raw),
            "frames" => Ok(VideoFormat::Frames),
            other => Err(Error::InvalidParameter(format!("unknown video format {other:?}"))),
        }
    }
}

/// Writes the video, landmark sidecar and ground truth into `dir`.
/// Returns the path of the video.
pub fn write_dataset(out: &SynthOutput, dir: &Path, format: VideoFormat) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let video = match format {
        VideoFormat::Raw => {
            let path = dir.join(RAW_VIDEO_FILE);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut writer = BufWriter::new(file);
            write_raw_stream(&out.frames, &mut writer)
                .and_then(|_| writer.flush())
                .map_err(|e| Error::io(&path, e))?;
            path
        }
        VideoFormat::Frames => {
            let path = dir.join(FRAMES_DIR);
            write_frame_directory(&out.frames, &path)?;
            path
        }
    };
    let path = dir.join(LANDMARKS_FILE);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut writer = BufWriter::new(file);
    write_landmarks(&out.landmarks, &mut writer)
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io(&path, e))?;
    write_signal_csv(&dir.join(GT_HR_FILE), &out.ground_truth.hr_numerics)?;
    write_signal_csv(&dir.join(GT_PPG_FILE), &out.ground_truth.ppg_samples)?;
    Ok(video)
}
