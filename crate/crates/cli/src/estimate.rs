use std::path::PathBuf;

use anyhow::Result;
use rppg_core::combine::WeightMap;
use rppg_core::diffuse::DiffuseMethod;
use rppg_core::ingest::{load_frame_sequence, load_landmarks};
use rppg_core::pipeline::{self, CombineMethod};
use serde::{Deserialize, Serialize};

use crate::config::{load_toml, set, RunConfig, CONFIG_ENV};
use crate::fail::CliError;
use crate::output::write_atomic;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// TOML run configuration; defaults to $RPPG_CONFIG when set.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Frame directory (with manifest.json) or raw stream file.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Landmark sidecar (JSON lines).
    #[arg(long)]
    pub landmarks: Option<PathBuf>,
    /// Report path (JSON).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<CombineMethod>,
    #[arg(long = "grid_rows")]
    pub grid_rows: Option<usize>,
    #[arg(long = "grid_cols")]
    pub grid_cols: Option<usize>,
    #[arg(long = "window_s")]
    pub window_s: Option<f64>,
    #[arg(long = "hop_s")]
    pub hop_s: Option<f64>,
    #[arg(long, value_parser = parse_diffuse)]
    pub diffuse: Option<DiffuseMethod>,
    #[arg(long = "bbox_smoothing")]
    pub bbox_smoothing: Option<f64>,
    #[arg(long = "low_hz")]
    pub low_hz: Option<f64>,
    #[arg(long = "high_hz")]
    pub high_hz: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long = "snr_halfwidth_hz")]
    pub snr_halfwidth_hz: Option<f64>,
    /// Artifact frequencies to suppress, comma separated.
    #[arg(long = "notch_hz", value_delimiter = ',')]
    pub notch_hz: Option<Vec<f64>>,
    #[arg(long = "notch_halfwidth_hz")]
    pub notch_halfwidth_hz: Option<f64>,
    #[arg(long = "max_peaks")]
    pub max_peaks: Option<usize>,
    #[arg(long = "min_prominence")]
    pub min_prominence: Option<f64>,
    /// Directory for per-window weight maps (CSV).
    #[arg(long = "debug_dir")]
    pub debug_dir: Option<PathBuf>,
}

fn parse_diffuse(s: &str) -> Result<DiffuseMethod, String> {
    match s {
        "bilateral" => Ok(DiffuseMethod::Bilateral),
        "min_channel" => Ok(DiffuseMethod::MinChannel),
        other => Err(format!("unknown diffuse estimator {other:?} (bilateral, min_channel)")),
    }
}

impl Args {
    fn resolve(self) -> Result<(RunConfig, Option<PathBuf>), CliError> {
        let mut cfg: RunConfig = load_toml(self.config.as_deref(), Some(CONFIG_ENV))?;
        if self.frames.is_some() {
            cfg.input.frames = self.frames;
        }
        if self.landmarks.is_some() {
            cfg.input.landmarks = self.landmarks;
        }
        if self.output.is_some() {
            cfg.input.output = self.output;
        }
        let p = &mut cfg.pipeline;
        set(&mut p.method, self.method);
        set(&mut p.grid_rows, self.grid_rows);
        set(&mut p.grid_cols, self.grid_cols);
        set(&mut p.window_s, self.window_s);
        set(&mut p.hop_s, self.hop_s);
        set(&mut p.diffuse, self.diffuse);
        if self.bbox_smoothing.is_some() {
            p.bbox_smoothing = self.bbox_smoothing;
        }
        let h = &mut cfg.heartrate;
        set(&mut h.low_hz, self.low_hz);
        set(&mut h.high_hz, self.high_hz);
        set(&mut h.order, self.order);
        set(&mut h.snr_halfwidth_hz, self.snr_halfwidth_hz);
        set(&mut h.notch_hz, self.notch_hz);
        set(&mut h.notch_halfwidth_hz, self.notch_halfwidth_hz);
        set(&mut h.max_peaks, self.max_peaks);
        set(&mut h.min_prominence, self.min_prominence);
        for (name, slot) in [
            ("frames", &cfg.input.frames),
            ("landmarks", &cfg.input.landmarks),
            ("output", &cfg.input.output),
        ] {
            if slot.is_none() {
                return Err(CliError::Usage(format!("--{name} is required (flag or [input] {name})")));
            }
        }
        Ok((cfg, self.debug_dir))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub start_s: f64,
    pub bpm: f64,
}

/// Written by `estimate`, read back by `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrReport {
    pub schema_version: u32,
    pub method: CombineMethod,
    pub frame_count: usize,
    pub fps: f64,
    pub windows: Vec<WindowEntry>,
    pub video_bpm: f64,
    pub config: RunConfig,
}

pub fn run(args: Args) -> Result<()> {
    let (cfg, debug_dir) = args.resolve()?;
    let frames_path = cfg.input.frames.clone().expect("resolved");
    let landmarks_path = cfg.input.landmarks.clone().expect("resolved");
    let output = cfg.input.output.clone().expect("resolved");

    let seq = load_frame_sequence(&frames_path)?;
    let landmarks = load_landmarks(&landmarks_path, &seq)?;
    let result = pipeline::estimate(&seq, &landmarks, &cfg.pipeline_config())?;
    log::info!(
        "{} windows, video heart rate {:.2} bpm",
        result.windows.len(),
        result.estimate.video_bpm
    );

    if let Some(dir) = debug_dir {
        for (k, w) in result.windows.iter().enumerate() {
            let maps: [(&str, &Option<WeightMap>); 3] =
                [("snr", &w.snr_weights), ("diffuse", &w.diffuse_weights), ("final", &w.final_weights)];
            for (name, map) in maps {
                if let Some(map) = map {
                    write_atomic(&dir.join(format!("window_{k:03}_{name}.csv")), map.to_csv().as_bytes())?;
                }
            }
        }
    }

    let report = HrReport {
        schema_version: SCHEMA_VERSION,
        method: cfg.pipeline.method,
        frame_count: seq.len(),
        fps: seq.fps(),
        windows: result
            .windows
            .iter()
            .map(|w| WindowEntry {
                start_s: w.start_s,
                bpm: w.bpm,
            })
            .collect(),
        video_bpm: result.estimate.video_bpm,
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    write_atomic(&output, json.as_bytes())
}
