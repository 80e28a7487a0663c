//! Remote photoplethysmography: heart rate from facial video.
//!
//! The pipeline follows four steps. A skin mask removes eyes and mouth from
//! the face box ([`roi`]). Masked pixels are combined into an RGB time series
//! ([`combine`]), either by plain facial aggregation, by per-cell SNR
//! weighting of pulse signals, or by the RGB-space SNR × diffuse weighting
//! ([`diffuse`]). The RGB series is turned into a pulse waveform with CHROM
//! ([`chrom`]) and a heart rate is read off its spectrum ([`heartrate`]).
//!
//! [`biophysics`] holds the skin reflectance and camera noise models,
//! [`synth`] renders synthetic videos with known ground truth, and
//! [`evaluation`] computes agreement statistics against a reference.

pub mod biophysics;
pub mod chrom;
pub mod combine;
pub mod diffuse;
mod error;
pub mod evaluation;
pub mod heartrate;
pub mod ingest;
pub mod numeric;
pub mod pipeline;
pub mod roi;
pub mod synth;

pub use error::{Error, ErrorFamily, Result};
