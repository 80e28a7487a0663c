//! The combination step: masked frames to RGB time series.
//!
//! Three strategies are provided. Facial aggregation averages every skin
//! pixel. SNR weighting extracts a pulse per grid cell and averages the
//! pulses with two-harmonic SNR weights. The proposed strategy multiplies
//! the SNR weights by diffuse-reflectance weights and averages the cell RGB
//! traces themselves, so pulse extraction runs once on a cleaner signal.

use rayon::prelude::*;

use crate::chrom::{chrom, PulseWaveform};
use crate::heartrate::{psd, two_harmonic_snr_from_psd, HrConfig, Passband};
use crate::ingest::RgbFrame;
use crate::numeric::CompensatedSum;
use crate::roi::{Bitmap, GridSpec};
use crate::{Error, Result};

/// Mean RGB per frame for one region.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbTrace {
    samples: Vec<[f64; 3]>,
    fps: f64,
}

impl RgbTrace {
    pub fn new(samples: Vec<[f64; 3]>, fps: f64) -> Self {
        Self { samples, fps }
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Per-cell traces of a grid, row-major. Dead cells had no skin pixels in
/// the first frame and take no part in weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTraces {
    rows: usize,
    cols: usize,
    traces: Vec<RgbTrace>,
    live: Vec<bool>,
}

impl GridTraces {
    pub fn new(rows: usize, cols: usize, traces: Vec<RgbTrace>, live: Vec<bool>) -> Self {
        assert_eq!(traces.len(), rows * cols);
        assert_eq!(live.len(), rows * cols);
        Self {
            rows,
            cols,
            traces,
            live,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn traces(&self) -> &[RgbTrace] {
        &self.traces
    }

    pub fn is_live(&self, cell: usize) -> bool {
        self.live[cell]
    }

    pub fn live(&self) -> &[bool] {
        &self.live
    }

    pub fn fps(&self) -> f64 {
        self.traces.first().map_or(0.0, RgbTrace::fps)
    }

    pub fn len(&self) -> usize {
        self.traces.first().map_or(0, RgbTrace::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Non-negative per-cell weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl WeightMap {
    /// Normalise `raw` to unit sum. Fails when the sum is below `1e-12`.
    pub fn normalized(rows: usize, cols: usize, raw: Vec<f64>) -> Result<Self> {
        assert_eq!(raw.len(), rows * cols);
        if raw.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidParameter("negative or NaN weight".into()));
        }
        let total = raw.iter().copied().collect::<CompensatedSum>().total();
        if !(total >= 1e-12) {
            return Err(Error::DegenerateWeights(total));
        }
        Ok(Self {
            rows,
            cols,
            values: raw.into_iter().map(|v| v / total).collect(),
        })
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        let n = rows * cols;
        Self {
            rows,
            cols,
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    /// Rows of comma-separated weights.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Default)]
struct PixelSum {
    rgb: [u64; 3],
    count: u64,
}

impl PixelSum {
    #[inline]
    fn add(&mut self, p: [u8; 3]) {
        for c in 0..3 {
            self.rgb[c] += p[c] as u64;
        }
        self.count += 1;
    }

    fn mean(&self) -> Option<[f64; 3]> {
        (self.count > 0).then(|| {
            let n = self.count as f64;
            [self.rgb[0] as f64 / n, self.rgb[1] as f64 / n, self.rgb[2] as f64 / n]
        })
    }
}

/// Mean of all masked pixels, per frame.
pub fn facial_aggregate(frames: &[RgbFrame], masks: &[Bitmap], fps: f64) -> Result<RgbTrace> {
    assert_eq!(frames.len(), masks.len());
    let samples = frames
        .par_iter()
        .zip(masks)
        .map(|(frame, mask)| {
            let mut acc = PixelSum::default();
            for y in 0..frame.height() {
                for x in 0..frame.width() {
                    if mask.get(x, y) {
                        acc.add(frame.pixel(x, y));
                    }
                }
            }
            acc.mean().ok_or(Error::EmptyRegion)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RgbTrace::new(samples, fps))
}

/// Mean of masked pixels per grid cell and frame. A cell with no skin in a
/// frame repeats its previous sample.
pub fn grid_traces(frames: &[RgbFrame], masks: &[Bitmap], grid: &GridSpec, fps: f64) -> GridTraces {
    assert_eq!(frames.len(), masks.len());
    let cells = grid.len();
    let bbox = grid.bbox();
    let per_frame: Vec<Vec<PixelSum>> = frames
        .par_iter()
        .zip(masks)
        .map(|(frame, mask)| {
            let mut sums = vec![PixelSum::default(); cells];
            let y_end = bbox.bottom().min(frame.height());
            let x_end = bbox.right().min(frame.width());
            for y in bbox.y..y_end {
                for x in bbox.x..x_end {
                    if mask.get(x, y) {
                        let cell = grid.cell_of(x, y).expect("pixel inside grid box");
                        sums[cell].add(frame.pixel(x, y));
                    }
                }
            }
            sums
        })
        .collect();

    let mut traces = Vec::with_capacity(cells);
    let mut live = Vec::with_capacity(cells);
    for cell in 0..cells {
        let mut samples = Vec::with_capacity(frames.len());
        let mut last = [0.0; 3];
        for sums in &per_frame {
            if let Some(m) = sums[cell].mean() {
                last = m;
            }
            samples.push(last);
        }
        live.push(per_frame.first().is_some_and(|s| s[cell].count > 0));
        traces.push(RgbTrace::new(samples, fps));
    }
    GridTraces::new(grid.rows(), grid.cols(), traces, live)
}

/// Two-harmonic SNR of a cell's CHROM pulse at the cell's own strongest
/// in-band frequency. Cells whose pulse cannot be formed score zero.
pub fn cell_snr(trace: &RgbTrace, cfg: &HrConfig) -> f64 {
    let score = || -> Result<f64> {
        let pulse = chrom(trace, &cfg.passband)?;
        let spectrum = psd(&pulse)?;
        let peak = spectrum
            .argmax_in(cfg.passband.low_hz, cfg.passband.high_hz)
            .ok_or(Error::NoPeaks)?;
        two_harmonic_snr_from_psd(&spectrum, spectrum.freqs[peak], cfg.snr_halfwidth_hz)
    };
    score().unwrap_or(0.0).max(0.0)
}

/// Normalised SNR weights. Dead cells get zero; if every live cell scores
/// zero the live cells share the weight equally.
pub fn snr_weights(traces: &GridTraces, cfg: &HrConfig) -> Result<WeightMap> {
    if !traces.live().iter().any(|&l| l) {
        return Err(Error::AllCellsDead);
    }
    let raw: Vec<f64> = traces
        .traces()
        .par_iter()
        .zip(traces.live())
        .map(|(t, &live)| if live { cell_snr(t, cfg) } else { 0.0 })
        .collect();
    WeightMap::normalized(traces.rows(), traces.cols(), raw).or_else(|_| {
        let live: Vec<f64> = traces.live().iter().map(|&l| l as u8 as f64).collect();
        WeightMap::normalized(traces.rows(), traces.cols(), live)
    })
}

/// Benchmark SNR weighting: weighted sum of per-cell CHROM pulses.
pub fn combine_benchmark_snr(traces: &GridTraces, weights: &WeightMap, passband: &Passband) -> Result<PulseWaveform> {
    let used: Vec<usize> = (0..weights.values().len())
        .filter(|&c| weights.get(c) > 0.0)
        .collect();
    let pulses = used
        .par_iter()
        .map(|&c| chrom(&traces.traces()[c], passband))
        .collect::<Result<Vec<_>>>()?;
    let n = traces.len();
    let samples = (0..n)
        .map(|i| {
            used.iter()
                .zip(&pulses)
                .map(|(&c, p)| weights.get(c) * p.samples()[i])
                .collect::<CompensatedSum>()
                .total()
        })
        .collect();
    Ok(PulseWaveform::new(samples, traces.fps()))
}

/// SNR weights × diffuse weights, renormalised. Dead cells are excluded.
pub fn final_weights(traces: &GridTraces, snr: &WeightMap, diffuse: &WeightMap) -> Result<WeightMap> {
    let raw: Vec<f64> = snr
        .values()
        .iter()
        .zip(diffuse.values())
        .zip(traces.live())
        .map(|((s, d), &live)| if live { s * d } else { 0.0 })
        .collect();
    WeightMap::normalized(snr.rows(), snr.cols(), raw)
}

/// Proposed combination: one RGB trace averaged with the product weights.
/// Pulse extraction is applied to the result afterwards, exactly once.
pub fn combine_proposed(traces: &GridTraces, snr: &WeightMap, diffuse: &WeightMap) -> Result<RgbTrace> {
    let weights = final_weights(traces, snr, diffuse)?;
    Ok(weighted_rgb(traces, &weights))
}

/// `Σ w(cell)·trace(cell)` per frame and channel.
pub fn weighted_rgb(traces: &GridTraces, weights: &WeightMap) -> RgbTrace {
    let used: Vec<usize> = (0..weights.values().len())
        .filter(|&c| weights.get(c) > 0.0)
        .collect();
    let samples = (0..traces.len())
        .map(|i| {
            std::array::from_fn(|ch| {
                used.iter()
                    .map(|&c| weights.get(c) * traces.traces()[c].samples()[i][ch])
                    .collect::<CompensatedSum>()
                    .total()
            })
        })
        .collect();
    RgbTrace::new(samples, traces.fps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{FaceLandmarks, Rect};
    use crate::roi::{build_grid, frame_mask};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn full_masks(n: usize, w: u32, h: u32) -> Vec<Bitmap> {
        vec![frame_mask(w, h, &FaceLandmarks::full_frame(w, h)); n]
    }

    #[test]
    fn aggregate_of_uniform_pixels() {
        let frames = vec![RgbFrame::filled(4, 4, [100, 150, 200]); 3];
        let t = facial_aggregate(&frames, &full_masks(3, 4, 4), 30.0).unwrap();
        assert!(t.samples().iter().all(|s| *s == [100.0, 150.0, 200.0]));
    }

    #[test]
    fn aggregate_two_pixels() {
        let mut frame = RgbFrame::filled(2, 1, [0, 0, 0]);
        frame.set_pixel(1, 0, [200, 100, 50]);
        let t = facial_aggregate(&[frame], &full_masks(1, 2, 1), 30.0).unwrap();
        assert_eq!(t.samples()[0], [100.0, 50.0, 25.0]);
    }

    #[test]
    fn aggregate_empty_mask() {
        let frames = vec![RgbFrame::filled(4, 4, [1, 2, 3]); 2];
        let mut masks = full_masks(2, 4, 4);
        masks[1] = Bitmap::new(4, 4);
        assert!(matches!(
            facial_aggregate(&frames, &masks, 30.0),
            Err(Error::EmptyRegion)
        ));
    }

    fn random_frames(seed: u64, n: usize, w: u32, h: u32) -> Vec<RgbFrame> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let data = (0..w * h * 3).map(|_| rng.random_range(20..=250u8)).collect();
                RgbFrame::new(w, h, data).unwrap()
            })
            .collect()
    }

    #[test]
    fn uniform_frames_cells_match_aggregate() {
        let frames: Vec<RgbFrame> = (0..5).map(|i| RgbFrame::filled(16, 16, [100 + i, 90, 80])).collect();
        let masks = full_masks(5, 16, 16);
        let grid = build_grid(Rect::new(0, 0, 16, 16), 4, 4).unwrap();
        let agg = facial_aggregate(&frames, &masks, 30.0).unwrap();
        let g = grid_traces(&frames, &masks, &grid, 30.0);
        for (cell, t) in g.traces().iter().enumerate() {
            assert!(g.is_live(cell));
            assert_eq!(t, &agg);
        }
    }

    #[test]
    fn masked_out_cell_is_dead() {
        let frames = random_frames(1, 4, 8, 8);
        let grid = build_grid(Rect::new(0, 0, 8, 8), 2, 2).unwrap();
        let mut masks = full_masks(4, 8, 8);
        for m in masks.iter_mut() {
            for y in 0..4 {
                for x in 4..8 {
                    m.set(x, y, false);
                }
            }
        }
        let g = grid_traces(&frames, &masks, &grid, 30.0);
        assert_eq!(g.live(), &[true, false, true, true]);
        let all = grid_traces(&frames, &full_masks(4, 8, 8), &grid, 30.0);
        for c in [0, 2, 3] {
            assert_eq!(g.traces()[c], all.traces()[c]);
        }
    }

    #[test]
    fn checkerboard_means_match_pixel_loop() {
        let frames = random_frames(2, 3, 12, 9);
        let grid = build_grid(Rect::new(1, 1, 10, 7), 3, 2).unwrap();
        let mut mask = Bitmap::new(12, 9);
        for y in 1..8 {
            for x in 1..11 {
                mask.set(x, y, (x + y) % 2 == 0);
            }
        }
        let masks = vec![mask.clone(); 3];
        let g = grid_traces(&frames, &masks, &grid, 30.0);
        for (cell, rect) in grid.cells().iter().enumerate() {
            for (t, frame) in frames.iter().enumerate() {
                let mut sum = [0.0; 3];
                let mut n = 0.0;
                for y in rect.y..rect.bottom() {
                    for x in rect.x..rect.right() {
                        if mask.get(x, y) {
                            let p = frame.pixel(x, y);
                            for c in 0..3 {
                                sum[c] += p[c] as f64;
                            }
                            n += 1.0;
                        }
                    }
                }
                for c in 0..3 {
                    assert!((g.traces()[cell].samples()[t][c] - sum[c] / n).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn empty_frame_carries_previous_sample() {
        let frames: Vec<RgbFrame> = (0..3).map(|i| RgbFrame::filled(4, 4, [10 * (i + 1), 5, 5])).collect();
        let grid = build_grid(Rect::new(0, 0, 4, 4), 1, 1).unwrap();
        let mut masks = full_masks(3, 4, 4);
        masks[1] = Bitmap::new(4, 4);
        let g = grid_traces(&frames, &masks, &grid, 30.0);
        let s = g.traces()[0].samples();
        assert_eq!(s[1], s[0]);
        assert_eq!(s[2], [30.0, 5.0, 5.0]);
    }

    fn pulse_trace(n: usize, fps: f64, bpm: f64, amp: f64, noise: f64, rng: &mut ChaCha8Rng) -> RgbTrace {
        RgbTrace::new(
            (0..n)
                .map(|i| {
                    let s = (2.0 * PI * bpm / 60.0 * i as f64 / fps).sin();
                    [
                        140.0 + 0.5 * amp * s + noise * rng.random_range(-1.0..1.0),
                        120.0 + amp * s + noise * rng.random_range(-1.0..1.0),
                        100.0 + 0.3 * amp * s + noise * rng.random_range(-1.0..1.0),
                    ]
                })
                .collect(),
            fps,
        )
    }

    #[test]
    fn noisy_cell_gets_smallest_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut traces: Vec<RgbTrace> = (0..3).map(|_| pulse_trace(300, 30.0, 72.0, 1.0, 0.0, &mut rng)).collect();
        traces.push(RgbTrace::new(
            (0..300)
                .map(|_| std::array::from_fn(|_| 120.0 + 3.0 * rng.random_range(-1.0..1.0)))
                .collect(),
            30.0,
        ));
        let g = GridTraces::new(2, 2, traces.clone(), vec![true; 4]);
        let cfg = HrConfig::default();
        let w = snr_weights(&g, &cfg).unwrap();
        // oracle: direct per-cell SNR
        let direct: Vec<f64> = traces.iter().map(|t| cell_snr(t, &cfg)).collect();
        assert!(direct[3] < direct[0]);
        assert!((0..3).all(|c| w.get(3) < w.get(c)));
        assert!((w.values().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_live_cell_is_one_hot() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let traces: Vec<RgbTrace> = (0..4).map(|_| pulse_trace(300, 30.0, 80.0, 1.0, 0.5, &mut rng)).collect();
        let g = GridTraces::new(2, 2, traces, vec![false, false, true, false]);
        let w = snr_weights(&g, &HrConfig::default()).unwrap();
        assert_eq!(w.values(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn all_dead() {
        let t = RgbTrace::new(vec![[1.0; 3]; 300], 30.0);
        let g = GridTraces::new(1, 2, vec![t.clone(), t], vec![false, false]);
        assert!(matches!(snr_weights(&g, &HrConfig::default()), Err(Error::AllCellsDead)));
    }

    fn random_grid(seed: u64, cells: usize) -> GridTraces {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let traces = (0..cells)
            .map(|_| {
                let bpm = rng.random_range(50.0..150.0);
                pulse_trace(300, 30.0, bpm, rng.random_range(0.2..2.0), 1.0, &mut rng)
            })
            .collect();
        GridTraces::new(1, cells, traces, vec![true; cells])
    }

    fn random_weights(rng: &mut ChaCha8Rng, cells: usize) -> WeightMap {
        let raw = (0..cells).map(|_| rng.random_range(0.0..1.0)).collect();
        WeightMap::normalized(1, cells, raw).unwrap()
    }

    #[test]
    fn benchmark_one_hot_and_equal_cells() {
        let g = random_grid(6, 3);
        let pb = Passband::default();
        let one_hot = WeightMap::normalized(1, 3, vec![0.0, 1.0, 0.0]).unwrap();
        let out = combine_benchmark_snr(&g, &one_hot, &pb).unwrap();
        assert_eq!(out, chrom(&g.traces()[1], &pb).unwrap());

        let t = g.traces()[0].clone();
        let twins = GridTraces::new(1, 2, vec![t.clone(), t.clone()], vec![true, true]);
        let out = combine_benchmark_snr(&twins, &WeightMap::uniform(1, 2), &pb).unwrap();
        let single = chrom(&t, &pb).unwrap();
        for (a, b) in out.samples().iter().zip(single.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn benchmark_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pb = Passband::default();
        for seed in 0..5 {
            let g = random_grid(100 + seed, 4);
            let w = random_weights(&mut rng, 4);
            let out = combine_benchmark_snr(&g, &w, &pb).unwrap();
            let pulses: Vec<PulseWaveform> = g.traces().iter().map(|t| chrom(t, &pb).unwrap()).collect();
            for i in 0..300 {
                let mut want = 0.0;
                for c in 0..4 {
                    want += w.get(c) * pulses[c].samples()[i];
                }
                assert!((out.samples()[i] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn proposed_with_uniform_weights_is_plain_mean() {
        let g = random_grid(8, 4);
        let u = WeightMap::uniform(1, 4);
        let out = combine_proposed(&g, &u, &u).unwrap();
        for i in 0..g.len() {
            for ch in 0..3 {
                let mean = g.traces().iter().map(|t| t.samples()[i][ch]).sum::<f64>() / 4.0;
                assert!((out.samples()[i][ch] - mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_diffuse_weight_gates_the_cell() {
        let g = random_grid(9, 3);
        let snr = WeightMap::normalized(1, 3, vec![0.1, 0.1, 0.8]).unwrap();
        let diffuse = WeightMap::normalized(1, 3, vec![0.5, 0.5, 0.0]).unwrap();
        let w = final_weights(&g, &snr, &diffuse).unwrap();
        assert_eq!(w.get(2), 0.0);
        let reduced = GridTraces::new(1, 2, g.traces()[..2].to_vec(), vec![true; 2]);
        let want = weighted_rgb(&reduced, &WeightMap::uniform(1, 2));
        let got = combine_proposed(&g, &snr, &diffuse).unwrap();
        for (a, b) in got.samples().iter().zip(want.samples()) {
            for ch in 0..3 {
                assert!((a[ch] - b[ch]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn proposed_matches_product_renormalize_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for seed in 0..10 {
            let g = random_grid(200 + seed, 5);
            let (s, d) = (random_weights(&mut rng, 5), random_weights(&mut rng, 5));
            let got = combine_proposed(&g, &s, &d).unwrap();
            let prod: Vec<f64> = (0..5).map(|c| s.get(c) * d.get(c)).collect();
            let total: f64 = prod.iter().sum();
            for i in 0..g.len() {
                for ch in 0..3 {
                    let want: f64 = (0..5).map(|c| prod[c] / total * g.traces()[c].samples()[i][ch]).sum();
                    assert!((got.samples()[i][ch] - want).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn degenerate_product() {
        let g = random_grid(11, 2);
        let s = WeightMap::normalized(1, 2, vec![1.0, 0.0]).unwrap();
        let d = WeightMap::normalized(1, 2, vec![0.0, 1.0]).unwrap();
        assert!(matches!(combine_proposed(&g, &s, &d), Err(Error::DegenerateWeights(_))));
    }

    #[test]
    fn weight_csv_layout() {
        let w = WeightMap::normalized(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(w.to_csv(), "0.25,0.25\n0.25,0.25\n");
    }

    proptest! {
        #[test]
        fn combined_samples_stay_in_envelope(seed in 0u64..1000, cells in 2usize..7) {
            let g = random_grid(seed, cells);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let (s, d) = (random_weights(&mut rng, cells), random_weights(&mut rng, cells));
            let out = combine_proposed(&g, &s, &d).unwrap();
            for i in 0..g.len() {
                for ch in 0..3 {
                    let vals: Vec<f64> = g.traces().iter().map(|t| t.samples()[i][ch]).collect();
                    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(out.samples()[i][ch] >= lo - 1e-9 && out.samples()[i][ch] <= hi + 1e-9);
                }
            }
        }

        #[test]
        fn cell_order_does_not_matter(seed in 0u64..1000, cells in 2usize..7) {
            let g = random_grid(seed, cells);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdef);
            let (s, d) = (random_weights(&mut rng, cells), random_weights(&mut rng, cells));
            let order: Vec<usize> = (0..cells).rev().collect();
            let permute = |w: &WeightMap| WeightMap::normalized(1, cells, order.iter().map(|&c| w.get(c)).collect()).unwrap();
            let g2 = GridTraces::new(1, cells, order.iter().map(|&c| g.traces()[c].clone()).collect(), vec![true; cells]);
            let a = combine_proposed(&g, &s, &d).unwrap();
            let b = combine_proposed(&g2, &permute(&s), &permute(&d)).unwrap();
            for (x, y) in a.samples().iter().zip(b.samples()) {
                for ch in 0..3 {
                    prop_assert!((x[ch] - y[ch]).abs() < 1e-9);
                }
            }
        }
    }
}
