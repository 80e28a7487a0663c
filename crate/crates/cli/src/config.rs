//! Run configuration: a TOML file with `[input]`, `[pipeline]` and
//! `[heartrate]` sections, each key overridable by a flag of the same name.

use std::path::{Path, PathBuf};

use rppg_core::diffuse::DiffuseMethod;
use rppg_core::heartrate::{HrConfig, Passband};
use rppg_core::pipeline::{CombineMethod, PipelineConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::fail::CliError;

pub const CONFIG_ENV: &str = "RPPG_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub frames: Option<PathBuf>,
    pub landmarks: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub method: CombineMethod,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub window_s: f64,
    pub hop_s: f64,
    pub diffuse: DiffuseMethod,
    pub bbox_smoothing: Option<f64>,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            method: p.method,
            grid_rows: p.grid_rows,
            grid_cols: p.grid_cols,
            window_s: p.window_s,
            hop_s: p.hop_s,
            diffuse: p.diffuse,
            bbox_smoothing: p.bbox_smoothing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeartrateSection {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
    pub snr_halfwidth_hz: f64,
    pub notch_hz: Vec<f64>,
    pub notch_halfwidth_hz: f64,
    pub max_peaks: usize,
    pub min_prominence: f64,
}

impl Default for HeartrateSection {
    fn default() -> Self {
        let hr = HrConfig::default();
        Self {
            low_hz: hr.passband.low_hz,
            high_hz: hr.passband.high_hz,
            order: hr.passband.order,
            snr_halfwidth_hz: hr.snr_halfwidth_hz,
            notch_hz: hr.notch_hz,
            notch_halfwidth_hz: hr.notch_halfwidth_hz,
            max_peaks: hr.max_peaks,
            min_prominence: hr.min_prominence,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputSection,
    pub pipeline: PipelineSection,
    pub heartrate: HeartrateSection,
}

impl RunConfig {
    pub fn pipeline_config(&self) -> PipelineConfig {
        let p = &self.pipeline;
        let h = &self.heartrate;
        PipelineConfig {
            method: p.method,
            grid_rows: p.grid_rows,
            grid_cols: p.grid_cols,
            window_s: p.window_s,
            hop_s: p.hop_s,
            diffuse: p.diffuse,
            bbox_smoothing: p.bbox_smoothing,
            hr: HrConfig {
                passband: Passband {
                    low_hz: h.low_hz,
                    high_hz: h.high_hz,
                    order: h.order,
                },
                snr_halfwidth_hz: h.snr_halfwidth_hz,
                notch_hz: h.notch_hz.clone(),
                notch_halfwidth_hz: h.notch_halfwidth_hz,
                max_peaks: h.max_peaks,
                min_prominence: h.min_prominence,
            },
        }
    }
}

/// Parses a TOML file into `T`, or returns defaults when no path is given
/// either explicitly or through `env`.
pub fn load_toml<T: DeserializeOwned + Default>(explicit: Option<&Path>, env: Option<&str>) -> Result<T, CliError> {
    let from_env = env.and_then(std::env::var_os).map(PathBuf::from);
    let Some(path) = explicit.map(Path::to_path_buf).or(from_env) else {
        return Ok(T::default());
    };
    if !path.is_file() {
        return Err(CliError::MissingConfig(path));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config {
        path: path.clone(),
        detail: e.to_string(),
    })?;
    toml::from_str(&text).map_err(|e| CliError::Config {
        path,
        detail: e.to_string(),
    })
}

/// Assigns `value` to `slot` when present.
pub fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
