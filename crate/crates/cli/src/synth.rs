use std::path::PathBuf;

use anyhow::Result;
use rppg_core::synth::{render, write_dataset, SynthScene, VideoFormat};

use crate::config::{load_toml, set};
use crate::output::write_atomic;

pub const SCENE_FILE: &str = "scene.toml";

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scene description (TOML); every key defaults when omitted.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: PathBuf,
    /// `raw` single-file stream or `frames` PPM directory.
    #[arg(long, default_value = "raw")]
    pub format: VideoFormat,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "hr_bpm")]
    pub hr_bpm: Option<f64>,
    #[arg(long = "duration_s")]
    pub duration_s: Option<f64>,
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long = "f_mel")]
    pub f_mel: Option<f64>,
    #[arg(long = "motion_px")]
    pub motion_px: Option<u32>,
    /// Disable shot and read noise.
    #[arg(long)]
    pub noiseless: bool,
}

pub fn run(args: Args) -> Result<()> {
    let mut scene: SynthScene = load_toml(args.scene.as_deref(), None)?;
    set(&mut scene.seed, args.seed);
    set(&mut scene.hr_bpm, args.hr_bpm);
    set(&mut scene.duration_s, args.duration_s);
    set(&mut scene.fps, args.fps);
    set(&mut scene.width, args.width);
    set(&mut scene.height, args.height);
    set(&mut scene.skin.f_mel, args.f_mel);
    set(&mut scene.motion_px, args.motion_px);
    scene.noiseless |= args.noiseless;

    let out = render(&scene)?;
    let video = write_dataset(&out, &args.output, args.format)?;
    write_atomic(&args.output.join(SCENE_FILE), toml::to_string(&scene)?.as_bytes())?;
    log::info!("{} frames written to {}", out.frames.len(), video.display());
    Ok(())
}
