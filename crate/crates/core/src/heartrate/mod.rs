//! Heart rate from a pulse waveform: band-pass, spectrum, peak selection,
//! and the two-harmonic SNR used to weight grid cells.

mod filter;
mod peaks;
mod spectrum;
mod windows;

pub use filter::{Biquad, ButterworthBandpass};
pub use peaks::{find_peaks, select_hr};
pub use spectrum::{
    band_bins, notches_from_reference, psd, suppress_artifacts, two_harmonic_snr,
    two_harmonic_snr_from_psd, Psd, MIN_PSD_LEN, SNR_CAP,
};
pub use windows::{estimate_video_hr, window_hr, HrEstimate, WindowPlan};

use serde::{Deserialize, Serialize};

use crate::chrom::PulseWaveform;
use crate::{Error, Result};

/// Band-pass used both inside CHROM and in the heart-rate step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Passband {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl Default for Passband {
    fn default() -> Self {
        Self {
            low_hz: 0.7,
            high_hz: 3.5,
            order: 3,
        }
    }
}

impl Passband {
    pub fn contains(&self, hz: f64) -> bool {
        hz >= self.low_hz && hz <= self.high_hz
    }

    /// Filter for sample rate `fps`; the Nyquist frequency must exceed the
    /// upper band edge.
    pub fn filter(&self, fps: f64) -> Result<ButterworthBandpass> {
        if !(fps > 2.0 * self.high_hz) {
            return Err(Error::SampleRateTooLow {
                fps,
                high: self.high_hz,
            });
        }
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz) || self.order == 0 {
            return Err(Error::InvalidParameter(format!(
                "passband [{}, {}] Hz, order {}",
                self.low_hz, self.high_hz, self.order
            )));
        }
        Ok(ButterworthBandpass::design(
            self.order,
            self.low_hz,
            self.high_hz,
            fps,
        ))
    }
}

/// Settings of the heart-rate step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrConfig {
    pub passband: Passband,
    /// Half-width `w` of the fundamental band; the harmonic band uses `2w`.
    pub snr_halfwidth_hz: f64,
    /// Known artifact frequencies removed from every spectrum.
    pub notch_hz: Vec<f64>,
    pub notch_halfwidth_hz: f64,
    pub max_peaks: usize,
    /// Minimum peak prominence as a fraction of the largest in-band power.
    pub min_prominence: f64,
}

impl Default for HrConfig {
    fn default() -> Self {
        Self {
            passband: Passband::default(),
            snr_halfwidth_hz: 0.1,
            notch_hz: Vec::new(),
            notch_halfwidth_hz: 0.05,
            max_peaks: 5,
            min_prominence: 0.05,
        }
    }
}

/// Zero-phase Butterworth band-pass of a waveform.
pub fn bandpass(wave: &PulseWaveform, passband: &Passband) -> Result<PulseWaveform> {
    let filter = passband.filter(wave.fps())?;
    Ok(PulseWaveform::new(filter.filtfilt(wave.samples()), wave.fps()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, fps: f64, seconds: f64) -> PulseWaveform {
        let n = (fps * seconds) as usize;
        PulseWaveform::new(
            (0..n).map(|i| (2.0 * PI * freq * i as f64 / fps).sin()).collect(),
            fps,
        )
    }

    /// Amplitude over the middle half, where edge transients have decayed.
    fn steady_amplitude(w: &PulseWaveform) -> f64 {
        let s = w.samples();
        let mid = &s[s.len() / 4..3 * s.len() / 4];
        (2.0 * mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt()
    }

    #[test]
    fn passband_tone_keeps_amplitude() {
        let out = bandpass(&sine(1.5, 30.0, 60.0), &Passband::default()).unwrap();
        let gain = steady_amplitude(&out);
        assert!((gain - 1.0).abs() <= 0.05, "gain {gain}");
    }

    #[test]
    fn low_tone_is_attenuated() {
        let out = bandpass(&sine(0.2, 30.0, 60.0), &Passband::default()).unwrap();
        let db = 20.0 * steady_amplitude(&out).log10();
        assert!(db <= -20.0, "attenuation {db} dB");
    }

    #[test]
    fn zeros_stay_zero() {
        let out = bandpass(&PulseWaveform::new(vec![0.0; 300], 30.0), &Passband::default()).unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn slow_camera_is_rejected() {
        let w = PulseWaveform::new(vec![0.0; 100], 6.0);
        assert!(matches!(
            bandpass(&w, &Passband::default()),
            Err(Error::SampleRateTooLow { .. })
        ));
    }
}
