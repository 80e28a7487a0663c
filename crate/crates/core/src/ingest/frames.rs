use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FrameSequence, RgbFrame};
use crate::{Error, Result};

pub const RAW_MAGIC: &[u8; 8] = b"RPPGRAW1";
const RAW_HEADER_LEN: usize = 24;

/// `manifest.json` of a frame directory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameManifest {
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub count: usize,
}

fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.ppm")
}

/// Load either a frame directory (numbered PPM files plus `manifest.json`)
/// or a raw stream file.
pub fn load_frame_sequence(path: &Path) -> Result<FrameSequence> {
    if path.is_dir() {
        load_frame_directory(path)
    } else if path.is_file() {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        read_raw_stream(BufReader::new(file))
    } else {
        Err(Error::MissingInput(path.to_path_buf()))
    }
}

fn load_frame_directory(dir: &Path) -> Result<FrameSequence> {
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: FrameManifest =
        serde_json::from_str(&text).map_err(|e| Error::malformed("manifest.json", e))?;
    if !(manifest.fps > 0.0) {
        return Err(Error::NonPositiveFps(manifest.fps));
    }
    if manifest.count == 0 {
        return Err(Error::malformed("manifest.json", "count must be at least 1"));
    }
    let expected = (manifest.width, manifest.height);
    let mut frames = Vec::with_capacity(manifest.count);
    for index in 0..manifest.count {
        let path = dir.join(frame_file_name(index));
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let frame = read_ppm(BufReader::new(file))?;
        if frame.dimensions() != expected {
            return Err(Error::DimensionMismatch {
                index,
                expected,
                found: frame.dimensions(),
            });
        }
        frames.push(frame);
    }
    FrameSequence::new(frames, manifest.fps)
}

/// Write `seq` as a frame directory. Existing frame files are overwritten.
pub fn write_frame_directory(seq: &FrameSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (index, frame) in seq.frames().iter().enumerate() {
        let path = dir.join(frame_file_name(index));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        write_ppm(frame, &mut out).map_err(|e| Error::io(&path, e))?;
        out.flush().map_err(|e| Error::io(&path, e))?;
    }
    let manifest = FrameManifest {
        fps: seq.fps(),
        width: seq.width(),
        height: seq.height(),
        count: seq.len(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Binary (P6) 8-bit PPM.
pub fn read_ppm<R: Read>(mut reader: R) -> Result<RgbFrame> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::malformed("ppm", e))?;
    let mut pos = 0;
    let mut fields = [0u32; 3];
    let magic = next_token(&bytes, &mut pos).ok_or_else(|| Error::malformed("ppm", "empty"))?;
    if magic != b"P6" {
        return Err(Error::malformed("ppm", "expected P6 magic"));
    }
    for field in fields.iter_mut() {
        let token = next_token(&bytes, &mut pos)
            .ok_or_else(|| Error::malformed("ppm", "truncated header"))?;
        *field = std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::malformed("ppm", "non-numeric header field"))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::malformed("ppm", format!("maxval {maxval}, need 255")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let len = width as usize * height as usize * 3;
    if bytes.len() < pos + len {
        return Err(Error::malformed("ppm", "truncated raster"));
    }
    RgbFrame::new(width, height, bytes[pos..pos + len].to_vec())
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

pub fn write_ppm<W: Write>(frame: &RgbFrame, out: &mut W) -> std::io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", frame.width(), frame.height())?;
    out.write_all(frame.as_bytes())
}

/// Parse the raw stream format: 24-byte header (`RPPGRAW1`, then u32 LE
/// width, height, count, fps in millihertz) followed by interleaved RGB.
pub fn read_raw_stream<R: Read>(mut reader: R) -> Result<FrameSequence> {
    let mut header = [0u8; RAW_HEADER_LEN];
    reader
        .read_exact(&mut header)
        .map_err(|_| Error::malformed("raw stream", "truncated header"))?;
    if &header[..8] != RAW_MAGIC {
        return Err(Error::malformed("raw stream", "bad magic"));
    }
    let field = |i: usize| u32::from_le_bytes(header[8 + 4 * i..12 + 4 * i].try_into().unwrap());
    let (width, height, count, fps_millihz) = (field(0), field(1), field(2), field(3));
    if fps_millihz == 0 {
        return Err(Error::NonPositiveFps(0.0));
    }
    if count == 0 || width == 0 || height == 0 {
        return Err(Error::malformed("raw stream", "empty geometry"));
    }
    let frame_len = width as usize * height as usize * 3;
    let mut frames = Vec::with_capacity(count as usize);
    for index in 0..count as usize {
        let mut data = vec![0u8; frame_len];
        reader.read_exact(&mut data).map_err(|_| {
            Error::malformed("raw stream", format!("payload ends inside frame {index}"))
        })?;
        frames.push(RgbFrame::new(width, height, data)?);
    }
    FrameSequence::new(frames, fps_millihz as f64 / 1000.0)
}

pub fn write_raw_stream<W: Write>(seq: &FrameSequence, out: &mut W) -> std::io::Result<()> {
    out.write_all(RAW_MAGIC)?;
    let fps_millihz = (seq.fps() * 1000.0).round() as u32;
    for v in [seq.width(), seq.height(), seq.len() as u32, fps_millihz] {
        out.write_all(&v.to_le_bytes())?;
    }
    for frame in seq.frames() {
        out.write_all(frame.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_bytes(w: u32, h: u32, n: u32, fps_millihz: u32, payload: usize) -> Vec<u8> {
        let mut bytes = RAW_MAGIC.to_vec();
        for v in [w, h, n, fps_millihz] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend((0..payload).map(|i| (i % 251) as u8));
        bytes
    }

    #[test]
    fn raw_stream_frame_count_follows_payload() {
        let (w, h, n) = (8u32, 8u32, 60u32);
        let bytes = raw_bytes(w, h, n, 30_000, (w * h * 3 * n) as usize);
        assert_eq!(bytes.len(), 24 + 8 * 8 * 3 * 60);
        let seq = read_raw_stream(&bytes[..]).unwrap();
        assert_eq!(seq.len(), 60);
        assert_eq!(seq.fps(), 30.0);
        assert_eq!(seq.frames()[1].pixel(0, 0), [(192 % 251) as u8, 193, 194]);
    }

    #[test]
    fn raw_stream_short_payload_is_rejected() {
        let bytes = raw_bytes(8, 8, 60, 30_000, 8 * 8 * 3 * 60 - 1);
        assert!(matches!(
            read_raw_stream(&bytes[..]),
            Err(Error::Malformed { .. })
        ));
    }

    #[test]
    fn raw_stream_zero_fps() {
        let bytes = raw_bytes(2, 2, 1, 0, 12);
        assert!(matches!(
            read_raw_stream(&bytes[..]),
            Err(Error::NonPositiveFps(_))
        ));
    }

    #[test]
    fn ppm_with_comment_parses() {
        let mut bytes = b"P6\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let frame = read_ppm(&bytes[..]).unwrap();
        assert_eq!(frame.dimensions(), (2, 1));
        assert_eq!(frame.pixel(1, 0), [4, 5, 6]);
    }

    #[test]
    fn directory_needs_manifest() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_frame_sequence(dir.path()),
            Err(Error::MissingManifest(_))
        ));
    }

    #[test]
    fn directory_with_zero_fps() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("manifest.json"),
            r#"{"fps":0,"width":4,"height":4,"count":1}"#,
        )
        .unwrap();
        assert!(matches!(
            load_frame_sequence(dir.path()),
            Err(Error::NonPositiveFps(_))
        ));
    }

    #[test]
    fn directory_of_identical_frames() {
        let dir = tempfile::tempdir().unwrap();
        let frames = vec![RgbFrame::filled(64, 64, [10, 20, 30]); 300];
        let seq = FrameSequence::new(frames, 30.0).unwrap();
        write_frame_directory(&seq, dir.path()).unwrap();
        let loaded = load_frame_sequence(dir.path()).unwrap();
        assert_eq!(loaded.len(), 300);
        assert_eq!(loaded.duration_s(), 10.0);
        assert_eq!(loaded, seq);
    }

    #[test]
    fn directory_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let seq = FrameSequence::new(vec![RgbFrame::filled(4, 4, [0; 3]); 3], 30.0).unwrap();
        write_frame_directory(&seq, dir.path()).unwrap();
        let odd = RgbFrame::filled(5, 4, [0; 3]);
        let mut f = File::create(dir.path().join(frame_file_name(2))).unwrap();
        write_ppm(&odd, &mut f).unwrap();
        drop(f);
        assert!(matches!(
            load_frame_sequence(dir.path()),
            Err(Error::DimensionMismatch { index: 2, .. })
        ));
    }
}
