use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FrameSequence, Rect};
use crate::{Error, Result};

/// Closed polygon with integer vertices. An empty polygon means the region
/// was not detected in that frame.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon(pub Vec<[i64; 2]>);

impl Polygon {
    pub fn rect(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Polygon(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn vertices(&self) -> &[[i64; 2]] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Even-odd test for the point `(x, y)`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let v = &self.0;
        if v.len() < 3 {
            return false;
        }
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            let (xi, yi) = (v[i][0] as f64, v[i][1] as f64);
            let (xj, yj) = (v[j][0] as f64, v[j][1] as f64);
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Integer bounding box `(x0, y0, x1, y1)`, inclusive of the vertices.
    pub fn bounds(&self) -> Option<(i64, i64, i64, i64)> {
        let first = self.0.first()?;
        Some(self.0.iter().fold(
            (first[0], first[1], first[0], first[1]),
            |(x0, y0, x1, y1), &[x, y]| (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
        ))
    }
}

/// Face box and excluded regions for one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceLandmarks {
    pub bbox: Rect,
    pub eyes: [Polygon; 2],
    pub mouth: Polygon,
}

impl FaceLandmarks {
    pub fn full_frame(width: u32, height: u32) -> Self {
        Self {
            bbox: Rect::new(0, 0, width, height),
            eyes: [Polygon::default(), Polygon::default()],
            mouth: Polygon::default(),
        }
    }

    pub fn excluded(&self) -> impl Iterator<Item = &Polygon> {
        self.eyes.iter().chain(std::iter::once(&self.mouth))
    }
}

/// Per-frame landmarks, one entry per frame in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkSidecar {
    entries: Vec<FaceLandmarks>,
}

impl LandmarkSidecar {
    /// Validate `entries` against a `width`×`height` sequence of `frames`.
    pub fn new(entries: Vec<FaceLandmarks>, frames: usize, width: u32, height: u32) -> Result<Self> {
        if entries.len() != frames {
            return Err(Error::CountMismatch {
                records: entries.len(),
                frames,
            });
        }
        for (frame, entry) in entries.iter().enumerate() {
            validate_entry(frame, entry, width, height)?;
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[FaceLandmarks] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn validate_entry(frame: usize, entry: &FaceLandmarks, width: u32, height: u32) -> Result<()> {
    if !entry.bbox.fits_in(width, height) {
        return Err(Error::OutOfBounds {
            frame,
            what: "face box".into(),
        });
    }
    let b = entry.bbox;
    for (name, poly) in [("eye", &entry.eyes[0]), ("eye", &entry.eyes[1]), ("mouth", &entry.mouth)] {
        if poly.is_empty() {
            continue;
        }
        if poly.vertices().len() < 3 {
            return Err(Error::MalformedPolygon {
                frame,
                vertices: poly.vertices().len(),
            });
        }
        let (x0, y0, x1, y1) = poly.bounds().expect("non-empty");
        if x0 < b.x as i64 || y0 < b.y as i64 || x1 > b.right() as i64 || y1 > b.bottom() as i64 {
            return Err(Error::OutOfBounds {
                frame,
                what: format!("{name} polygon"),
            });
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Record {
    frame: usize,
    bbox: [i64; 4],
    eyes: [Polygon; 2],
    mouth: Polygon,
}

/// Read a JSON-lines sidecar and validate it against `seq`.
pub fn load_landmarks(path: &Path, seq: &FrameSequence) -> Result<LandmarkSidecar> {
    if !path.is_file() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (line_no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line)
            .map_err(|e| Error::malformed("landmark sidecar", format!("line {}: {e}", line_no + 1)))?;
        if record.frame != entries.len() {
            return Err(Error::malformed(
                "landmark sidecar",
                format!("line {}: frame {} out of order", line_no + 1, record.frame),
            ));
        }
        let [x, y, w, h] = record.bbox;
        if [x, y, w, h].iter().any(|&v| v < 0 || v > u32::MAX as i64) {
            return Err(Error::OutOfBounds {
                frame: record.frame,
                what: "face box".into(),
            });
        }
        entries.push(FaceLandmarks {
            bbox: Rect::new(x as u32, y as u32, w as u32, h as u32),
            eyes: record.eyes,
            mouth: record.mouth,
        });
    }
    LandmarkSidecar::new(entries, seq.len(), seq.width(), seq.height())
}

pub fn write_landmarks<W: Write>(sidecar: &LandmarkSidecar, out: &mut W) -> std::io::Result<()> {
    for (frame, entry) in sidecar.entries().iter().enumerate() {
        let b = entry.bbox;
        let record = Record {
            frame,
            bbox: [b.x as i64, b.y as i64, b.width as i64, b.height as i64],
            eyes: entry.eyes.clone(),
            mouth: entry.mouth.clone(),
        };
        serde_json::to_writer(&mut *out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
