use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::peaks;
use crate::chrom::PulseWaveform;
use crate::numeric;
use crate::{Error, Result};

pub const MIN_PSD_LEN: usize = 64;

/// Upper bound on the two-harmonic SNR.
pub const SNR_CAP: f64 = 100.0;

const ZERO_PAD_FACTOR: usize = 8;

/// One-sided power spectral density on a uniform grid starting at 0 Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub resolution: f64,
}

impl Psd {
    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    pub fn max_freq(&self) -> f64 {
        self.freqs.last().copied().unwrap_or(0.0)
    }

    pub fn total_power(&self) -> f64 {
        numeric::sum(self.power.iter().copied()) * self.resolution
    }

    /// Integrated power in the band around `center_hz`.
    pub fn band_power(&self, center_hz: f64, halfwidth_hz: f64) -> f64 {
        let bins = band_bins(self.len(), self.resolution, center_hz, halfwidth_hz);
        numeric::sum(self.power[bins].iter().copied()) * self.resolution
    }

    /// Bin of the largest power with frequency in `[low, high]`.
    pub fn argmax_in(&self, low_hz: f64, high_hz: f64) -> Option<usize> {
        self.freqs
            .iter()
            .zip(&self.power)
            .enumerate()
            .filter(|(_, (f, _))| **f >= low_hz && **f <= high_hz)
            .max_by(|a, b| a.1 .1.total_cmp(b.1 .1))
            .map(|(k, _)| k)
    }
}

/// Bins belonging to the band `center ± halfwidth`, measured in whole bins
/// from the bin nearest `center`. Bins exactly `halfwidth` away are outside.
pub fn band_bins(len: usize, resolution: f64, center_hz: f64, halfwidth_hz: f64) -> std::ops::Range<usize> {
    let center = (center_hz / resolution).round() as i64;
    let half = ((halfwidth_hz / resolution).round() as i64).max(1);
    let lo = (center - half + 1).clamp(0, len as i64) as usize;
    let hi = (center + half).clamp(0, len as i64) as usize;
    lo..hi.max(lo)
}

/// Hann-tapered periodogram, zero-padded to the next power of two at least
/// eight times the signal length.
pub fn psd(wave: &PulseWaveform) -> Result<Psd> {
    let x = wave.samples();
    let n = x.len();
    if n < MIN_PSD_LEN {
        return Err(Error::TooShort {
            len: n,
            min: MIN_PSD_LEN,
        });
    }
    let nfft = (ZERO_PAD_FACTOR * n).next_power_of_two();
    let taper: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect();
    let taper_energy = numeric::sum(taper.iter().map(|w| w * w));

    let mut buf: Vec<Complex64> = x
        .iter()
        .zip(&taper)
        .map(|(v, w)| Complex64::new(v * w, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(nfft)
        .collect();
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);

    let fs = wave.fps();
    let scale = 1.0 / (fs * taper_energy);
    let half = nfft / 2;
    let power = (0..=half)
        .map(|k| {
            let p = buf[k].norm_sqr() * scale;
            if k == 0 || k == half {
                p
            } else {
                2.0 * p
            }
        })
        .collect();
    let resolution = fs / nfft as f64;
    Ok(Psd {
        freqs: (0..=half).map(|k| k as f64 * resolution).collect(),
        power,
        resolution,
    })
}

/// Replace the power within `halfwidth_hz` of each notch by a straight line
/// between the bins just outside the notch. Notches outside the spectrum
/// are ignored.
pub fn suppress_artifacts(psd: &Psd, notch_hz: &[f64], halfwidth_hz: f64) -> Psd {
    let mut out = psd.clone();
    let last = psd.len().saturating_sub(1);
    for &notch in notch_hz {
        if !(notch >= 0.0 && notch <= psd.max_freq()) {
            continue;
        }
        let lo_f = notch - halfwidth_hz;
        let hi_f = notch + halfwidth_hz;
        let inside: Vec<usize> = (0..psd.len())
            .filter(|&k| psd.freqs[k] >= lo_f && psd.freqs[k] <= hi_f)
            .collect();
        let (Some(&first), Some(&end)) = (inside.first(), inside.last()) else {
            continue;
        };
        let left = first.checked_sub(1);
        let right = (end < last).then_some(end + 1);
        let (lk, rk) = match (left, right) {
            (Some(l), Some(r)) => (l, r),
            (Some(l), None) => (l, l),
            (None, Some(r)) => (r, r),
            (None, None) => {
                out.power.iter_mut().for_each(|p| *p = 0.0);
                continue;
            }
        };
        let (pl, pr) = (out.power[lk], out.power[rk]);
        for k in first..=end {
            out.power[k] = if lk == rk {
                pl
            } else {
                pl + (pr - pl) * (k - lk) as f64 / (rk - lk) as f64
            };
        }
    }
    out
}

/// Candidate artifact frequencies from a reference (background) spectrum:
/// prominent peaks in `[low, high]` whose power exceeds `ratio` times the
/// median in-band power.
pub fn notches_from_reference(reference: &Psd, low_hz: f64, high_hz: f64, ratio: f64) -> Vec<f64> {
    let mut band: Vec<f64> = reference
        .freqs
        .iter()
        .zip(&reference.power)
        .filter(|(f, _)| **f >= low_hz && **f <= high_hz)
        .map(|(_, p)| *p)
        .collect();
    if band.is_empty() {
        return Vec::new();
    }
    band.sort_by(f64::total_cmp);
    let median = band[band.len() / 2];
    peaks::local_maxima(reference, low_hz, high_hz)
        .into_iter()
        .filter(|&k| reference.power[k] > ratio * median)
        .map(|k| reference.freqs[k])
        .collect()
}

/// Power in the fundamental band `p ± w` and harmonic band `2p ± 2w`
/// divided by the power everywhere else, clamped to `[0, SNR_CAP]`.
pub fn two_harmonic_snr(wave: &PulseWaveform, p_hz: f64, w_hz: f64) -> Result<f64> {
    two_harmonic_snr_from_psd(&psd(wave)?, p_hz, w_hz)
}

pub fn two_harmonic_snr_from_psd(psd: &Psd, p_hz: f64, w_hz: f64) -> Result<f64> {
    if !(w_hz > 0.0) || !(p_hz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "SNR needs positive p and w, got p={p_hz}, w={w_hz}"
        )));
    }
    let total = psd.total_power();
    if !(total >= 1e-15) {
        return Err(Error::DegenerateSpectrum(total));
    }
    let signal = psd.band_power(p_hz, w_hz) + psd.band_power(2.0 * p_hz, 2.0 * w_hz);
    let noise = total - signal;
    if noise <= 1e-12 * total {
        return Ok(SNR_CAP);
    }
    Ok((signal / noise).clamp(0.0, SNR_CAP))
}
