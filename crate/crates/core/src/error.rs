use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing input: {0}")]
    MissingInput(PathBuf),
    #[error("frame directory {0} has no manifest.json")]
    MissingManifest(PathBuf),
    #[error("frame {index} is {found:?}, expected {expected:?}")]
    DimensionMismatch {
        index: usize,
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("frame rate must be positive, got {0}")]
    NonPositiveFps(f64),
    #[error("malformed input {what}: {detail}")]
    Malformed { what: String, detail: String },
    #[error("landmark records ({records}) do not match frame count ({frames})")]
    CountMismatch { records: usize, frames: usize },
    #[error("frame {frame}: polygon has {vertices} vertices, need at least 3")]
    MalformedPolygon { frame: usize, vertices: usize },
    #[error("frame {frame}: {what} lies outside its bounds")]
    OutOfBounds { frame: usize, what: String },
    #[error("timestamps must be strictly increasing (row {row})")]
    NonMonotoneTime { row: usize },
    #[error("file {0} contains no samples")]
    EmptyFile(PathBuf),
    #[error("heart rate {bpm} bpm at row {row} outside [30, 240]")]
    BpmOutOfRange { row: usize, bpm: f64 },

    #[error("grid {rows}x{cols} is finer than the {width}x{height} box")]
    GridTooFine {
        rows: usize,
        cols: usize,
        width: u32,
        height: u32,
    },
    #[error("no masked skin pixels in region")]
    EmptyRegion,
    #[error("every grid cell is dead")]
    AllCellsDead,
    #[error("combined weights are degenerate (sum {0:e})")]
    DegenerateWeights(f64),

    #[error("trace of {len} samples is shorter than {min} required")]
    TraceTooShort { len: usize, min: usize },
    #[error("channel {0} has non-positive mean")]
    ZeroChannelMean(usize),

    #[error("sample rate {fps} Hz too low for a passband reaching {high} Hz")]
    SampleRateTooLow { fps: f64, high: f64 },
    #[error("signal of {len} samples too short for spectral estimation (need {min})")]
    TooShort { len: usize, min: usize },
    #[error("no spectral peaks in the heart-rate band")]
    NoPeaks,
    #[error("total spectral power {0:e} is degenerate")]
    DegenerateSpectrum(f64),
    #[error("video too short for a single analysis window")]
    NoWindows,

    #[error("wavelength {0} nm outside the tabulated range")]
    WavelengthOutOfRange(f64),
    #[error("skin reflectance vanishes at {0} nm")]
    DegenerateReflectance(f64),
    #[error("camera SNR denominator is zero")]
    ZeroDenominator,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty sweep: {0}")]
    EmptySweep(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("paired lists differ in length ({est} vs {gt})")]
    LengthMismatch { est: usize, gt: usize },
    #[error("no samples to evaluate")]
    EmptyInput,
}

/// Coarse grouping of errors, one process exit code per family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorFamily {
    Io,
    MissingInput,
    InvalidInput,
    Signal,
    Model,
    Evaluation,
}

impl ErrorFamily {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorFamily::MissingInput => 3,
            ErrorFamily::InvalidInput => 4,
            ErrorFamily::Signal => 5,
            ErrorFamily::Model => 6,
            ErrorFamily::Evaluation => 7,
            ErrorFamily::Io => 8,
        }
    }
}

impl Error {
    pub fn family(&self) -> ErrorFamily {
        use Error::*;
        match self {
            Io { .. } => ErrorFamily::Io,
            MissingInput(_) | MissingManifest(_) => ErrorFamily::MissingInput,
            DimensionMismatch { .. }
            | NonPositiveFps(_)
            | Malformed { .. }
            | CountMismatch { .. }
            | MalformedPolygon { .. }
            | OutOfBounds { .. }
            | NonMonotoneTime { .. }
            | EmptyFile(_)
            | BpmOutOfRange { .. }
            | InvalidScene(_) => ErrorFamily::InvalidInput,
            GridTooFine { .. }
            | EmptyRegion
            | AllCellsDead
            | DegenerateWeights(_)
            | TraceTooShort { .. }
            | ZeroChannelMean(_)
            | SampleRateTooLow { .. }
            | TooShort { .. }
            | NoPeaks
            | DegenerateSpectrum(_)
            | NoWindows => ErrorFamily::Signal,
            WavelengthOutOfRange(_)
            | DegenerateReflectance(_)
            | ZeroDenominator
            | InvalidParameter(_)
            | EmptySweep(_) => ErrorFamily::Model,
            LengthMismatch { .. } | EmptyInput => ErrorFamily::Evaluation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(what: impl Into<String>, detail: impl ToString) -> Self {
        Error::Malformed {
            what: what.into(),
            detail: detail.to_string(),
        }
    }
}
