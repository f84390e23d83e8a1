use thiserror::Error;

use crate::model::PixelPoint;

/// Errors produced by the resting-phase toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("target trajectory leaves the image at frame {frame} (center {center:?}, radius {radius_px:.2} px)")]
    TrajectoryOutOfBounds {
        frame: usize,
        center: PixelPoint,
        radius_px: f64,
    },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("point {point:?} lies outside the frame")]
    PointOutOfBounds { point: PixelPoint },

    #[error("template has zero variance")]
    FlatTemplate,

    #[error("template window around {point:?} does not fit inside the frame")]
    TemplateOutOfBounds { point: PixelPoint },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("ROI of {roi:?} px does not fit in a {frame:?} px frame")]
    RoiLargerThanImage {
        roi: (usize, usize),
        frame: (usize, usize),
    },

    #[error("ROI at ({x}, {y}) of size {height}x{width} exceeds the frame")]
    RoiOutOfBounds {
        x: usize,
        y: usize,
        height: usize,
        width: usize,
    },

    #[error("bad motion variant: {0}")]
    BadVariant(String),

    #[error("empty input")]
    EmptyInput,

    #[error("classification window [{alpha_ms}, {rr_ms} - {omega_ms}] ms is empty")]
    InvalidWindow {
        alpha_ms: f64,
        omega_ms: f64,
        rr_ms: f64,
    },

    #[error("degenerate labels: {positives} resting and {negatives} moving transitions in window")]
    DegenerateLabels { positives: usize, negatives: usize },

    #[error("pairing mismatch: {0}")]
    PairingMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
