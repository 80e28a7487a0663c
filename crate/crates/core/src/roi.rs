//! Skin masks and face-box grids.
//!
//! A pixel is skin when its centre lies inside the face box and outside
//! every eye and mouth polygon (even-odd rule).

use rayon::prelude::*;

use crate::ingest::{FaceLandmarks, FrameSequence, LandmarkSidecar, Rect};
use crate::{Error, Result};

/// Boolean image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Bitmap {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn count_in(&self, rect: &Rect) -> usize {
        (rect.y..rect.bottom())
            .map(|y| (rect.x..rect.right()).filter(|&x| self.get(x, y)).count())
            .sum()
    }
}

/// Per-frame skin masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkinMask {
    frames: Vec<Bitmap>,
}

impl SkinMask {
    pub fn from_bitmaps(frames: Vec<Bitmap>) -> Self {
        Self { frames }
    }

    pub fn frames(&self) -> &[Bitmap] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MaskOptions {
    /// Exponential smoothing factor for the face box across frames
    /// (`box_t = α·box_{t-1} + (1-α)·detected_t`). `None` uses boxes as given.
    pub bbox_smoothing: Option<f64>,
}

/// Mask for a single frame.
pub fn frame_mask(width: u32, height: u32, landmarks: &FaceLandmarks) -> Bitmap {
    let mut mask = Bitmap::new(width, height);
    let b = landmarks.bbox;
    let excluded: Vec<_> = landmarks
        .excluded()
        .filter(|p| p.vertices().len() >= 3)
        .map(|p| (p, p.bounds().expect("non-empty")))
        .collect();
    for y in b.y..b.bottom().min(height) {
        for x in b.x..b.right().min(width) {
            let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
            let hidden = excluded.iter().any(|(poly, (x0, y0, x1, y1))| {
                cx >= *x0 as f64
                    && cx <= *x1 as f64
                    && cy >= *y0 as f64
                    && cy <= *y1 as f64
                    && poly.contains(cx, cy)
            });
            mask.set(x, y, !hidden);
        }
    }
    mask
}

pub fn build_mask(seq: &FrameSequence, landmarks: &LandmarkSidecar) -> SkinMask {
    build_mask_with(seq, landmarks, MaskOptions::default())
}

pub fn build_mask_with(seq: &FrameSequence, landmarks: &LandmarkSidecar, opts: MaskOptions) -> SkinMask {
    let (w, h) = (seq.width(), seq.height());
    let entries: Vec<FaceLandmarks> = match opts.bbox_smoothing {
        Some(alpha) => {
            let boxes: Vec<Rect> = landmarks.entries().iter().map(|e| e.bbox).collect();
            landmarks
                .entries()
                .iter()
                .zip(smooth_boxes(&boxes, alpha, w, h))
                .map(|(e, bbox)| FaceLandmarks { bbox, ..e.clone() })
                .collect()
        }
        None => landmarks.entries().to_vec(),
    };
    SkinMask {
        frames: entries.par_iter().map(|e| frame_mask(w, h, e)).collect(),
    }
}

/// Exponentially smoothed boxes, kept inside the frame.
pub fn smooth_boxes(boxes: &[Rect], alpha: f64, width: u32, height: u32) -> Vec<Rect> {
    let mut state: Option<[f64; 4]> = None;
    boxes
        .iter()
        .map(|b| {
            let current = [b.x as f64, b.y as f64, b.right() as f64, b.bottom() as f64];
            let s = match state {
                Some(prev) => std::array::from_fn(|i| alpha * prev[i] + (1.0 - alpha) * current[i]),
                None => current,
            };
            state = Some(s);
            let x0 = (s[0].round().max(0.0) as u32).min(width);
            let y0 = (s[1].round().max(0.0) as u32).min(height);
            let x1 = (s[2].round().max(0.0) as u32).clamp(x0, width);
            let y1 = (s[3].round().max(0.0) as u32).clamp(y0, height);
            Rect::new(x0, y0, x1 - x0, y1 - y0)
        })
        .collect()
}

/// Row-major tiling of a face box. Edge cells absorb the remainder when the
/// box does not divide evenly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
    bbox: Rect,
    cell_rects: Vec<Rect>,
}

impl GridSpec {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.cell_rects.is_empty()
    }

    pub fn bbox(&self) -> Rect {
        self.bbox
    }

    pub fn cells(&self) -> &[Rect] {
        &self.cell_rects
    }

    /// Cell index for a pixel, if it lies in the box.
    #[inline]
    pub fn cell_of(&self, x: u32, y: u32) -> Option<usize> {
        if !self.bbox.contains_pixel(x, y) {
            return None;
        }
        let cw = self.bbox.width / self.cols as u32;
        let ch = self.bbox.height / self.rows as u32;
        let col = (((x - self.bbox.x) / cw) as usize).min(self.cols - 1);
        let row = (((y - self.bbox.y) / ch) as usize).min(self.rows - 1);
        Some(row * self.cols + col)
    }
}

pub fn build_grid(bbox: Rect, rows: usize, cols: usize) -> Result<GridSpec> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter(format!(
            "grid dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if (bbox.width as usize) < cols || (bbox.height as usize) < rows {
        return Err(Error::GridTooFine {
            rows,
            cols,
            width: bbox.width,
            height: bbox.height,
        });
    }
    let cw = bbox.width / cols as u32;
    let ch = bbox.height / rows as u32;
    let mut cell_rects = Vec::with_capacity(rows * cols);
    for r in 0..rows as u32 {
        let y = bbox.y + r * ch;
        let height = if r as usize == rows - 1 { bbox.bottom() - y } else { ch };
        for c in 0..cols as u32 {
            let x = bbox.x + c * cw;
            let width = if c as usize == cols - 1 { bbox.right() - x } else { cw };
            cell_rects.push(Rect::new(x, y, width, height));
        }
    }
    Ok(GridSpec {
        rows,
        cols,
        bbox,
        cell_rects,
    })
}
