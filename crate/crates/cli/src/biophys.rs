use std::path::PathBuf;

use anyhow::Result;
use rppg_core::biophysics::{
    emit_figure5_curves, CameraNoiseParams, Channel, SkinParams, SpectralContext, SweepConfig, DEFAULT_STEP_NM,
    SNR_CSV, STRENGTH_CSV,
};
use serde::{Deserialize, Serialize};

use crate::config::{load_toml, set};
use crate::output::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiophysConfig {
    pub sweep: SweepConfig,
    pub skin: SkinParams,
    pub noise: CameraNoiseParams,
    pub step_nm: f64,
    /// `wavelength_nm,value` CSV replacing the flat illuminant.
    pub illuminant: Option<PathBuf>,
    pub sensitivity_red: Option<PathBuf>,
    pub sensitivity_green: Option<PathBuf>,
    pub sensitivity_blue: Option<PathBuf>,
}

impl Default for BiophysConfig {
    fn default() -> Self {
        Self {
            sweep: SweepConfig::default(),
            skin: SkinParams::default(),
            noise: CameraNoiseParams::default(),
            step_nm: DEFAULT_STEP_NM,
            illuminant: None,
            sensitivity_red: None,
            sensitivity_green: None,
            sensitivity_blue: None,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Sweep configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for the two curve tables.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long = "f_mel_min")]
    pub f_mel_min: Option<f64>,
    #[arg(long = "f_mel_max")]
    pub f_mel_max: Option<f64>,
    #[arg(long = "f_mel_points")]
    pub f_mel_points: Option<usize>,
    #[arg(long = "pixel_min")]
    pub pixel_min: Option<f64>,
    #[arg(long = "pixel_max")]
    pub pixel_max: Option<f64>,
    #[arg(long = "pixel_points")]
    pub pixel_points: Option<usize>,
    #[arg(long)]
    pub channel: Option<Channel>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long = "sigma_r")]
    pub sigma_r: Option<f64>,
    #[arg(long = "sigma_q")]
    pub sigma_q: Option<f64>,
    #[arg(long = "step_nm")]
    pub step_nm: Option<f64>,
    #[arg(long)]
    pub illuminant: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<()> {
    let mut cfg: BiophysConfig = load_toml(args.config.as_deref(), None)?;
    let s = &mut cfg.sweep;
    set(&mut s.f_mel_min, args.f_mel_min);
    set(&mut s.f_mel_max, args.f_mel_max);
    set(&mut s.f_mel_points, args.f_mel_points);
    set(&mut s.pixel_min, args.pixel_min);
    set(&mut s.pixel_max, args.pixel_max);
    set(&mut s.pixel_points, args.pixel_points);
    set(&mut s.channel, args.channel);
    set(&mut cfg.noise.gain, args.gain);
    set(&mut cfg.noise.sigma_r, args.sigma_r);
    set(&mut cfg.noise.sigma_q, args.sigma_q);
    set(&mut cfg.step_nm, args.step_nm);
    if args.illuminant.is_some() {
        cfg.illuminant = args.illuminant;
    }

    let mut ctx = SpectralContext::with_step(cfg.step_nm)?;
    if let Some(path) = &cfg.illuminant {
        ctx = ctx.override_illuminant(path)?;
    }
    for (channel, path) in [
        (Channel::Red, &cfg.sensitivity_red),
        (Channel::Green, &cfg.sensitivity_green),
        (Channel::Blue, &cfg.sensitivity_blue),
    ] {
        if let Some(path) = path {
            ctx = ctx.override_sensitivity(channel, path)?;
        }
    }
    let curves = emit_figure5_curves(&cfg.skin, &ctx, &cfg.noise, &cfg.sweep)?;
    write_atomic(&args.output.join(STRENGTH_CSV), curves.strength_csv().as_bytes())?;
    write_atomic(&args.output.join(SNR_CSV), curves.snr_csv().as_bytes())?;
    Ok(())
}
