//! Skin reflectance, pulsatile signal strength, biophysical SINR and the
//! camera noise model.
//!
//! Reflectance follows a two-layer model: light crosses the epidermis twice
//! (Beer-Lambert, melanin plus baseline absorption) and is reflected once by
//! a finite Kubelka-Munk dermis whose absorption mixes blood and bloodless
//! tissue. Only the dermis depends on blood volume, so the epidermal factor
//! cancels in the SINR.

mod tables;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numeric::interp_linear;
use crate::{Error, Result};

pub use tables::{baseline_absorption, blood_absorption, dermal_scattering, melanin_absorption};

pub const MIN_WAVELENGTH_NM: f64 = 400.0;
pub const MAX_WAVELENGTH_NM: f64 = 700.0;
/// Quadrature step of the default context; absorption tables are
/// interpolated between their 10 nm nodes.
pub const DEFAULT_STEP_NM: f64 = 5.0;

/// Epidermis thickness, cm.
pub const EPIDERMIS_CM: f64 = 0.006;
/// Dermis thickness, cm.
pub const DERMIS_CM: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkinParams {
    /// Melanin volume fraction of the epidermis, typically 0.01–0.45.
    pub f_mel: f64,
    /// Mean blood volume fraction of the dermis.
    pub f_blood: f64,
    /// Hemoglobin fraction of blood.
    pub f_hg: f64,
    /// Pulsatile swing of `f_blood`, at most a tenth of it.
    pub delta_f_blood: f64,
}

impl Default for SkinParams {
    fn default() -> Self {
        Self {
            f_mel: 0.15,
            f_blood: 0.02,
            f_hg: 0.45,
            delta_f_blood: 0.001,
        }
    }
}

impl SkinParams {
    pub fn with_f_mel(self, f_mel: f64) -> Self {
        Self { f_mel, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} = {v} is not in (0, 1)")))
            }
        };
        unit("f_mel", self.f_mel)?;
        unit("f_blood", self.f_blood)?;
        unit("f_hg", self.f_hg)?;
        if !(self.delta_f_blood >= 0.0 && self.delta_f_blood <= 0.1 * self.f_blood) {
            return Err(Error::InvalidParameter(format!(
                "delta_f_blood = {} must lie in [0, 0.1·f_blood]",
                self.delta_f_blood
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Red,
    Green,
    Blue,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Red, Channel::Green, Channel::Blue];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" | "red" => Ok(Channel::Red),
            "g" | "green" => Ok(Channel::Green),
            "b" | "blue" => Ok(Channel::Blue),
            other => Err(Error::InvalidParameter(format!("unknown channel {other:?}"))),
        }
    }
}

/// Illuminant and camera sensitivities on a uniform wavelength grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralContext {
    wavelengths: Vec<f64>,
    illuminant: Vec<f64>,
    sensitivity: [Vec<f64>; 3],
}

impl Default for SpectralContext {
    fn default() -> Self {
        Self::with_step(DEFAULT_STEP_NM).expect("valid default grid")
    }
}

impl SpectralContext {
    /// Flat illuminant and Gaussian sensitivities (610/540/460 nm, σ 35 nm)
    /// on a grid of the given step.
    pub fn with_step(step_nm: f64) -> Result<Self> {
        let span = MAX_WAVELENGTH_NM - MIN_WAVELENGTH_NM;
        let steps = span / step_nm;
        if !(step_nm > 0.0) || (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "wavelength step {step_nm} nm does not divide 400–700 nm"
            )));
        }
        let wavelengths: Vec<f64> = (0..=steps.round() as usize)
            .map(|i| MIN_WAVELENGTH_NM + i as f64 * step_nm)
            .collect();
        let gaussian = |centre: f64| -> Vec<f64> {
            wavelengths
                .iter()
                .map(|&l| (-(l - centre).powi(2) / (2.0 * 35.0 * 35.0)).exp())
                .collect()
        };
        let sensitivity = [gaussian(610.0), gaussian(540.0), gaussian(460.0)];
        Self::new(wavelengths.clone(), vec![1.0; wavelengths.len()], sensitivity)
    }

    pub fn new(wavelengths: Vec<f64>, illuminant: Vec<f64>, sensitivity: [Vec<f64>; 3]) -> Result<Self> {
        let n = wavelengths.len();
        if n < 2 {
            return Err(Error::InvalidParameter("spectral grid needs two or more points".into()));
        }
        if illuminant.len() != n || sensitivity.iter().any(|s| s.len() != n) {
            return Err(Error::InvalidParameter("spectra are not aligned with the grid".into()));
        }
        let step = wavelengths[1] - wavelengths[0];
        let uniform = wavelengths
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
        if !(step > 0.0) || !uniform {
            return Err(Error::InvalidParameter("wavelength grid is not uniform and increasing".into()));
        }
        for &l in [wavelengths[0], wavelengths[n - 1]].iter() {
            check_wavelength(l)?;
        }
        if illuminant.iter().chain(sensitivity.iter().flatten()).any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter("spectra must be nonnegative".into()));
        }
        Ok(Self {
            wavelengths,
            illuminant,
            sensitivity,
        })
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn illuminant(&self) -> &[f64] {
        &self.illuminant
    }

    pub fn sensitivity(&self, channel: Channel) -> &[f64] {
        &self.sensitivity[channel.index()]
    }

    /// Replaces the illuminant with a `wavelength_nm,value` CSV resampled
    /// onto the grid.
    pub fn override_illuminant(mut self, path: &Path) -> Result<Self> {
        self.illuminant = self.resample(&load_spectrum(path)?);
        Self::new(self.wavelengths, self.illuminant, self.sensitivity)
    }

    pub fn override_sensitivity(mut self, channel: Channel, path: &Path) -> Result<Self> {
        self.sensitivity[channel.index()] = self.resample(&load_spectrum(path)?);
        Self::new(self.wavelengths, self.illuminant, self.sensitivity)
    }

    fn resample(&self, (xs, ys): &(Vec<f64>, Vec<f64>)) -> Vec<f64> {
        self.wavelengths.iter().map(|&l| interp_linear(xs, ys, l)).collect()
    }

    /// `∫ E·S_c·f dλ` by the trapezoid rule.
    fn integrate(&self, channel: Channel, f: impl Fn(f64) -> f64) -> f64 {
        let samples: Vec<f64> = self.wavelengths.iter().map(|&l| f(l)).collect();
        self.integrate_samples(channel, &samples)
    }

    fn integrate_samples(&self, channel: Channel, samples: &[f64]) -> f64 {
        let s = self.sensitivity(channel);
        let ys: Vec<f64> = (0..samples.len())
            .map(|i| self.illuminant[i] * s[i] * samples[i])
            .collect();
        trapezoid(&self.wavelengths, &ys)
    }
}

/// Reads a two-column `wavelength_nm,value` CSV with increasing wavelengths.
pub fn load_spectrum(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::malformed("spectrum", format!("{other:?}")),
    })?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (row, record) in reader.deserialize::<(f64, f64)>().enumerate() {
        let (x, y) = record.map_err(|e| Error::malformed("spectrum", e.to_string()))?;
        if xs.last().is_some_and(|&last| x <= last) {
            return Err(Error::NonMonotoneTime { row: row + 1 });
        }
        xs.push(x);
        ys.push(y);
    }
    if xs.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok((xs, ys))
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

fn check_wavelength(nm: f64) -> Result<()> {
    if (MIN_WAVELENGTH_NM - 1e-9..=MAX_WAVELENGTH_NM + 1e-9).contains(&nm) {
        Ok(())
    } else {
        Err(Error::WavelengthOutOfRange(nm))
    }
}

/// Double-pass epidermal transmission `T_ep²`.
pub fn epidermal_transmission_sq(f_mel: f64, nm: f64) -> f64 {
    let mu = f_mel * melanin_absorption(nm) + (1.0 - f_mel) * baseline_absorption(nm);
    (-2.0 * mu * EPIDERMIS_CM).exp()
}

fn dermal_absorption(f_blood: f64, f_hg: f64, nm: f64) -> f64 {
    f_blood * blood_absorption(nm, f_hg) + (1.0 - f_blood) * baseline_absorption(nm)
}

/// Kubelka-Munk reflectance of a finite slab over a black backing, with its
/// derivative in the absorption coefficient.
fn kubelka_munk(mu_a: f64, mu_s: f64, depth: f64) -> (f64, f64) {
    let u = mu_a + 2.0 * mu_s;
    let k = (mu_a * u).sqrt();
    let beta = (mu_a / u).sqrt();
    let z = (-2.0 * k * depth).exp();
    let num = (1.0 - beta * beta) * (1.0 - z);
    let den = (1.0 + beta).powi(2) - (1.0 - beta).powi(2) * z;

    let dk = (u + mu_a) / (2.0 * k);
    let dbeta = mu_s / (beta * u * u);
    let dz = -2.0 * depth * z * dk;
    let dnum = -2.0 * beta * dbeta * (1.0 - z) - (1.0 - beta * beta) * dz;
    let dden = 2.0 * (1.0 + beta) * dbeta + 2.0 * (1.0 - beta) * dbeta * z - (1.0 - beta).powi(2) * dz;
    (num / den, (dnum * den - num * dden) / (den * den))
}

/// Dermal reflectance `R_d` and `dR_d/df_blood`.
fn dermal_reflectance(params: &SkinParams, nm: f64) -> (f64, f64) {
    let mu_a = dermal_absorption(params.f_blood, params.f_hg, nm);
    let (r, dr_dmu) = kubelka_munk(mu_a, dermal_scattering(nm), DERMIS_CM);
    let dmu_df = blood_absorption(nm, params.f_hg) - baseline_absorption(nm);
    (r, dr_dmu * dmu_df)
}

/// `R(λ) = T_ep²(λ)·R_d(λ)`.
pub fn skin_reflectance(params: &SkinParams, nm: f64) -> Result<f64> {
    check_wavelength(nm)?;
    Ok(epidermal_transmission_sq(params.f_mel, nm) * dermal_reflectance(params, nm).0)
}

/// `dR/df_blood` at the given parameters, in closed form.
pub fn reflectance_derivative(params: &SkinParams, nm: f64) -> Result<f64> {
    check_wavelength(nm)?;
    Ok(epidermal_transmission_sq(params.f_mel, nm) * dermal_reflectance(params, nm).1)
}

/// Camera-weighted mean reflectance `∫E·S_c·R / ∫E·S_c` of one channel.
pub fn channel_reflectance(params: &SkinParams, ctx: &SpectralContext, channel: Channel) -> f64 {
    let norm = ctx.integrate(channel, |_| 1.0);
    if norm <= 0.0 {
        return 0.0;
    }
    ctx.integrate(channel, |l| {
        epidermal_transmission_sq(params.f_mel, l) * dermal_reflectance(params, l).0
    }) / norm
}

/// PPG signal strength `M = |∫E·S_c·(dR/df_blood)·Δf_blood dλ|`.
pub fn signal_strength(params: &SkinParams, ctx: &SpectralContext, channel: Channel) -> Result<f64> {
    params.validate()?;
    let m = ctx.integrate(channel, |l| {
        epidermal_transmission_sq(params.f_mel, l) * dermal_reflectance(params, l).1 * params.delta_f_blood
    });
    Ok(m.abs())
}

/// Biophysical SINR `N = ∫E·S_c·L dλ` with
/// `L = (dR/df_blood·Δf_blood)² / R²` evaluated at the mean blood fraction.
pub fn sinr(params: &SkinParams, ctx: &SpectralContext, channel: Channel) -> Result<f64> {
    params.validate()?;
    let mut ratios = Vec::with_capacity(ctx.wavelengths.len());
    for &l in &ctx.wavelengths {
        let t2 = epidermal_transmission_sq(params.f_mel, l);
        let (rd, drd) = dermal_reflectance(params, l);
        let r = t2 * rd;
        if !(r >= 1e-9) {
            return Err(Error::DegenerateReflectance(l));
        }
        ratios.push((t2 * drd * params.delta_f_blood / r).powi(2));
    }
    Ok(ctx.integrate_samples(channel, &ratios))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraNoiseParams {
    pub gain: f64,
    /// Read noise, electrons.
    pub sigma_r: f64,
    /// Quantisation noise, levels.
    pub sigma_q: f64,
}

impl Default for CameraNoiseParams {
    fn default() -> Self {
        Self {
            gain: 1.0,
            sigma_r: 1.5,
            sigma_q: 0.5,
        }
    }
}

impl CameraNoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain > 0.0) || !(self.sigma_r >= 0.0) || !(self.sigma_q >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "camera noise needs gain > 0 and nonnegative sigmas, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Noise variance at pixel value `p`, in levels².
    pub fn variance(&self, p: f64) -> f64 {
        p / self.gain + (self.sigma_r / self.gain).powi(2) + self.sigma_q.powi(2)
    }
}

/// Pixel SNR `p / √(p/g + (σ_r/g)² + σ_q²)`.
pub fn camera_snr(p: f64, noise: &CameraNoiseParams) -> Result<f64> {
    noise.validate()?;
    if !(p >= 0.0) {
        return Err(Error::InvalidParameter(format!("pixel value {p} is negative")));
    }
    let var = noise.variance(p);
    if var <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(p / var.sqrt())
}

/// Sweep ranges for the two signal-characteristic curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub f_mel_min: f64,
    pub f_mel_max: f64,
    pub f_mel_points: usize,
    pub pixel_min: f64,
    pub pixel_max: f64,
    pub pixel_points: usize,
    pub channel: Channel,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            f_mel_min: 0.02,
            f_mel_max: 0.45,
            f_mel_points: 44,
            pixel_min: 1.0,
            pixel_max: 255.0,
            pixel_points: 255,
            channel: Channel::Green,
        }
    }
}

fn linspace(name: &str, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !(lo <= hi) || (points > 1 && lo == hi) {
        return Err(Error::EmptySweep(format!("{name}: [{lo}, {hi}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { hi } else { lo + i as f64 * step }).collect())
}

/// Signal strength against melanin (table A) and camera SNR against pixel
/// value (table B).
#[derive(Debug, Clone, PartialEq)]
pub struct Figure5Curves {
    pub strength_vs_melanin: Vec<(f64, f64)>,
    pub snr_vs_pixel: Vec<(f64, f64)>,
}

pub const STRENGTH_CSV: &str = "signal_strength_vs_melanin.csv";
pub const SNR_CSV: &str = "camera_snr_vs_pixel.csv";

impl Figure5Curves {
    pub fn strength_csv(&self) -> String {
        table_csv("f_mel,signal_strength", &self.strength_vs_melanin)
    }

    pub fn snr_csv(&self) -> String {
        table_csv("pixel_value,snr", &self.snr_vs_pixel)
    }
}

fn table_csv(header: &str, rows: &[(f64, f64)]) -> String {
    let mut out = format!("{header}\n");
    for (x, y) in rows {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

pub fn emit_figure5_curves(
    base: &SkinParams,
    ctx: &SpectralContext,
    noise: &CameraNoiseParams,
    sweep: &SweepConfig,
) -> Result<Figure5Curves> {
    let melanin = linspace("f_mel", sweep.f_mel_min, sweep.f_mel_max, sweep.f_mel_points)?;
    let pixels = linspace("pixel", sweep.pixel_min, sweep.pixel_max, sweep.pixel_points)?;
    let strength_vs_melanin = melanin
        .into_iter()
        .map(|f| Ok((f, signal_strength(&base.with_f_mel(f), ctx, sweep.channel)?)))
        .collect::<Result<_>>()?;
    let snr_vs_pixel = pixels
        .into_iter()
        .map(|p| Ok((p, camera_snr(p, noise)?)))
        .collect::<Result<_>>()?;
    Ok(Figure5Curves {
        strength_vs_melanin,
        snr_vs_pixel,
    })
}
