use super::{HrConfig, Psd};
use crate::{Error, Result};

/// Strict local maxima of the spectrum with frequency in `[low, high]`.
pub(crate) fn local_maxima(psd: &Psd, low_hz: f64, high_hz: f64) -> Vec<usize> {
    let p = &psd.power;
    (1..p.len().saturating_sub(1))
        .filter(|&k| psd.freqs[k] >= low_hz && psd.freqs[k] <= high_hz)
        .filter(|&k| p[k] > p[k - 1] && p[k] > p[k + 1])
        .collect()
}

/// Topographic prominence of the peak at `k` over the whole spectrum.
fn prominence(p: &[f64], k: usize) -> f64 {
    let mut left_min = p[k];
    for i in (0..k).rev() {
        if p[i] > p[k] {
            break;
        }
        left_min = left_min.min(p[i]);
    }
    let mut right_min = p[k];
    for &v in &p[k + 1..] {
        if v > p[k] {
            break;
        }
        right_min = right_min.min(v);
    }
    p[k] - left_min.max(right_min)
}

/// Up to `cfg.max_peaks` in-band peaks, strongest first. A peak must be a
/// strict local maximum with prominence of at least `cfg.min_prominence`
/// times the largest in-band power.
pub fn find_peaks(psd: &Psd, cfg: &HrConfig) -> Vec<usize> {
    let band = cfg.passband;
    let max_power = psd
        .freqs
        .iter()
        .zip(&psd.power)
        .filter(|(f, _)| band.contains(**f))
        .map(|(_, p)| *p)
        .fold(0.0, f64::max);
    if !(max_power > 0.0) {
        return Vec::new();
    }
    let threshold = cfg.min_prominence * max_power;
    let mut peaks: Vec<usize> = local_maxima(psd, band.low_hz, band.high_hz)
        .into_iter()
        .filter(|&k| prominence(&psd.power, k) >= threshold)
        .collect();
    peaks.sort_by(|&a, &b| psd.power[b].total_cmp(&psd.power[a]).then(a.cmp(&b)));
    peaks.truncate(cfg.max_peaks);
    peaks
}

/// Heart rate in bpm: among the strongest in-band peaks, the one with the
/// most combined power at its fundamental (`±w`) and second harmonic
/// (`±2w`).
pub fn select_hr(psd: &Psd, cfg: &HrConfig) -> Result<f64> {
    let w = cfg.snr_halfwidth_hz;
    let mut best: Option<(usize, f64)> = None;
    for k in find_peaks(psd, cfg) {
        let f = psd.freqs[k];
        let score = psd.band_power(f, w) + psd.band_power(2.0 * f, 2.0 * w);
        // peaks arrive strongest first, so ties keep the stronger one
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((k, score));
        }
    }
    best.map(|(k, _)| 60.0 * psd.freqs[k]).ok_or(Error::NoPeaks)
}
