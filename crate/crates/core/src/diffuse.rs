//! Specular/diffuse separation and diffuse weights per grid cell.
//!
//! Under the dichromatic model with a white illuminant a pixel is
//! `I = m_d·Λ + m_s/3`, where `Λ` is the diffuse chromaticity. The maximum
//! chromaticity of specular pixels is pulled towards 1/3, so diffuse max
//! chromaticity is recovered by repeatedly raising each pixel's maximum
//! chromaticity to a joint-bilateral average of its neighbours, guided by a
//! specular-invariant pseudo-chromaticity. The specular amount then follows
//! from `m_d = (3·I_max − ΣI) / (3Λ_max − 1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::RgbFrame;
use crate::numeric::CompensatedSum;
use crate::roi::{Bitmap, GridSpec};
use crate::combine::WeightMap;
use crate::{Error, Result};

/// Which diffuse estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffuseMethod {
    /// Iterative joint-bilateral chromaticity propagation.
    #[default]
    Bilateral,
    /// Per-pixel minimum-channel subtraction; fast, cruder.
    MinChannel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralParams {
    pub spatial_sigma: f64,
    /// In chromaticity units.
    pub range_sigma: f64,
    pub radius: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            spatial_sigma: 5.0,
            range_sigma: 0.05,
            radius: 5,
            tolerance: 0.03,
            max_iterations: 10,
        }
    }
}

/// Real-valued diffuse estimate of a frame, interleaved RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffuseFrame {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl DiffuseFrame {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> [f32; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// `(R+G+B)/3` per pixel.
    pub fn luminance(&self) -> Vec<f32> {
        self.data
            .chunks_exact(3)
            .map(|c| (c[0] + c[1] + c[2]) / 3.0)
            .collect()
    }

    /// Rounded to 8 bits, e.g. for inspection as PPM.
    pub fn to_rgb8(&self) -> RgbFrame {
        let data = self.data.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
        RgbFrame::new(self.width, self.height, data).expect("consistent dimensions")
    }
}

/// Saturation `1 - 3·σ_min` below which a pixel's pseudo-chromaticity is
/// treated as undefined.
const MIN_SATURATION: f64 = 0.1;

pub fn estimate_diffuse(frame: &RgbFrame) -> DiffuseFrame {
    estimate_diffuse_with(frame, &BilateralParams::default())
}

pub fn estimate_diffuse_with(frame: &RgbFrame, params: &BilateralParams) -> DiffuseFrame {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let n = w * h;
    let mut sigma_max = vec![0.0f64; n];
    // pseudo-chromaticity guide; NaN where undefined
    let mut guide = vec![f64::NAN; n];
    let mut valid = vec![false; n];
    for (i, p) in frame.pixels().enumerate() {
        let [r, g, b] = p.map(f64::from);
        let sum = r + g + b;
        if sum <= 0.0 {
            continue;
        }
        valid[i] = true;
        let max = r.max(g).max(b) / sum;
        let min = r.min(g).min(b) / sum;
        sigma_max[i] = max;
        let saturation = 1.0 - 3.0 * min;
        if saturation >= MIN_SATURATION {
            guide[i] = (max - min) / saturation;
        }
    }

    let filter = JointBilateral::new(params);
    for _ in 0..params.max_iterations {
        let filtered = filter.apply(&sigma_max, &guide, &valid, w, h);
        let mut change = 0.0f64;
        for i in 0..n {
            if valid[i] && filtered[i] > sigma_max[i] {
                change = change.max(filtered[i] - sigma_max[i]);
                sigma_max[i] = filtered[i];
            }
        }
        if change < params.tolerance {
            break;
        }
    }

    let mut data = Vec::with_capacity(n * 3);
    for (i, p) in frame.pixels().enumerate() {
        let rgb = p.map(f64::from);
        let specular = if valid[i] {
            specular_per_channel(rgb, sigma_max[i])
        } else {
            0.0
        };
        data.extend(rgb.map(|v| ((v - specular) as f32).clamp(0.0, v as f32)));
    }
    DiffuseFrame {
        width: frame.width(),
        height: frame.height(),
        data,
    }
}

/// Specular contribution per channel given diffuse max chromaticity `lambda`.
fn specular_per_channel(rgb: [f64; 3], lambda: f64) -> f64 {
    let sum = rgb[0] + rgb[1] + rgb[2];
    let max = rgb[0].max(rgb[1]).max(rgb[2]);
    let min = rgb[0].min(rgb[1]).min(rgb[2]);
    let denom = 3.0 * lambda - 1.0;
    if denom <= 1e-9 {
        return 0.0;
    }
    let m_diffuse = (3.0 * max - sum) / denom;
    let m_specular = (sum - m_diffuse).clamp(0.0, 3.0 * min);
    m_specular / 3.0
}

struct JointBilateral {
    radius: usize,
    spatial: Vec<f64>,
    range_lut: Vec<f64>,
}

const RANGE_LUT_SIZE: usize = 4096;

impl JointBilateral {
    fn new(p: &BilateralParams) -> Self {
        let d = 2 * p.radius + 1;
        let spatial = (0..d * d)
            .map(|k| {
                let dy = (k / d) as f64 - p.radius as f64;
                let dx = (k % d) as f64 - p.radius as f64;
                (-(dx * dx + dy * dy) / (2.0 * p.spatial_sigma * p.spatial_sigma)).exp()
            })
            .collect();
        // guide differences lie in [0, 1]
        let range_lut = (0..=RANGE_LUT_SIZE)
            .map(|k| {
                let diff = k as f64 / RANGE_LUT_SIZE as f64;
                (-(diff * diff) / (2.0 * p.range_sigma * p.range_sigma)).exp()
            })
            .collect();
        Self {
            radius: p.radius,
            spatial,
            range_lut,
        }
    }

    #[inline]
    fn range_weight(&self, a: f64, b: f64) -> f64 {
        if a.is_nan() {
            // undefined centre guide: spatial weighting only
            return 1.0;
        }
        if b.is_nan() {
            return 0.0;
        }
        let k = ((a - b).abs().min(1.0) * RANGE_LUT_SIZE as f64).round() as usize;
        self.range_lut[k]
    }

    fn apply(&self, values: &[f64], guide: &[f64], valid: &[bool], w: usize, h: usize) -> Vec<f64> {
        let r = self.radius as isize;
        let d = 2 * self.radius + 1;
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if !valid[i] {
                    continue;
                }
                let (mut num, mut den) = (0.0, 0.0);
                for dy in -r..=r {
                    let yy = y as isize + dy;
                    if yy < 0 || yy >= h as isize {
                        continue;
                    }
                    for dx in -r..=r {
                        let xx = x as isize + dx;
                        if xx < 0 || xx >= w as isize {
                            continue;
                        }
                        let j = yy as usize * w + xx as usize;
                        if !valid[j] {
                            continue;
                        }
                        let k = (dy + r) as usize * d + (dx + r) as usize;
                        let weight = self.spatial[k] * self.range_weight(guide[i], guide[j]);
                        num += weight * values[j];
                        den += weight;
                    }
                }
                out[i] = if den > 0.0 { num / den } else { values[i] };
            }
        }
        out
    }
}

/// Specular-free image by subtracting each pixel's minimum channel.
pub fn min_channel_diffuse(frame: &RgbFrame) -> DiffuseFrame {
    let data = frame
        .pixels()
        .flat_map(|p| {
            let m = p[0].min(p[1]).min(p[2]);
            p.map(|v| (v - m) as f32)
        })
        .collect();
    DiffuseFrame {
        width: frame.width(),
        height: frame.height(),
        data,
    }
}

pub fn estimate(frame: &RgbFrame, method: DiffuseMethod) -> DiffuseFrame {
    match method {
        DiffuseMethod::Bilateral => estimate_diffuse(frame),
        DiffuseMethod::MinChannel => min_channel_diffuse(frame),
    }
}

/// Diffuse luminance maps for a run of frames, computed in parallel.
pub fn luminance_maps(frames: &[&RgbFrame], method: DiffuseMethod) -> Vec<Vec<f32>> {
    frames
        .par_iter()
        .map(|f| estimate(f, method).luminance())
        .collect()
}

/// Mean diffuse luminance over masked pixels and frames in each cell,
/// normalised to unit sum. Cells with no masked pixels get zero.
pub fn diffuse_weights(frames: &[DiffuseFrame], grid: &GridSpec, masks: &[Bitmap]) -> Result<WeightMap> {
    let maps: Vec<Vec<f32>> = frames.iter().map(DiffuseFrame::luminance).collect();
    let width = frames.first().map_or(0, |f| f.width());
    diffuse_weights_from_luminance(&maps, width, grid, masks)
}

/// As [`diffuse_weights`], from precomputed luminance maps of frames
/// `width` pixels wide.
pub fn diffuse_weights_from_luminance<M: AsRef<[f32]>>(
    maps: &[M],
    width: u32,
    grid: &GridSpec,
    masks: &[Bitmap],
) -> Result<WeightMap> {
    assert_eq!(maps.len(), masks.len());
    let cells = grid.len();
    let mut sums = vec![CompensatedSum::new(); cells];
    let mut counts = vec![0u64; cells];
    let bbox = grid.bbox();
    for (map, mask) in maps.iter().zip(masks) {
        for y in bbox.y..bbox.bottom().min(mask.height()) {
            for x in bbox.x..bbox.right().min(mask.width()) {
                if mask.get(x, y) {
                    let cell = grid.cell_of(x, y).expect("inside grid box");
                    sums[cell].add(map.as_ref()[y as usize * width as usize + x as usize] as f64);
                    counts[cell] += 1;
                }
            }
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyRegion);
    }
    let raw: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s.total() / c as f64 } else { 0.0 })
        .collect();
    WeightMap::normalized(grid.rows(), grid.cols(), raw)
}
