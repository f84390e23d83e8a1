//! Shared domain types and series preprocessing.
//!
//! Coordinates follow one convention everywhere: `x` is the column, `y` is
//! the row, the origin is the top-left pixel and pixel centers sit on integer
//! coordinates. Resampling uses the align-corners convention, so the first and
//! last pixel centers of an axis map onto each other under any resize.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest frame edge accepted for a series.
pub const MIN_FRAME_EDGE: usize = 8;

/// A point in pixel coordinates (fractional positions allowed).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PixelPoint {
    /// Column coordinate.
    pub x: f64,
    /// Row coordinate.
    pub y: f64,
}

impl PixelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &PixelPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn midpoint(&self, other: &PixelPoint) -> PixelPoint {
        PixelPoint::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// True when the point lies in `[0, width) x [0, height)`.
    pub fn is_inside(&self, height: usize, width: usize) -> bool {
        self.is_finite()
            && self.x >= 0.0
            && self.y >= 0.0
            && self.x < width as f64
            && self.y < height as f64
    }

    /// Clamp onto the pixel-center range `[0, width-1] x [0, height-1]`.
    pub fn clamped(&self, height: usize, width: usize) -> PixelPoint {
        PixelPoint::new(
            self.x.clamp(0.0, width.saturating_sub(1) as f64),
            self.y.clamp(0.0, height.saturating_sub(1) as f64),
        )
    }
}

/// A single 2-D frame stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidSeries("frame dimensions must be positive".into()));
        }
        if data.len() != height * width {
            return Err(Error::LengthMismatch {
                expected: height * width,
                actual: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![0.0; height * width],
        }
    }

    /// Build a frame by evaluating `f(x, y)` at every pixel center.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`.
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    /// Bilinear sample with clamp-to-edge border handling.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        bilinear(&self.data, self.height, self.width, x, y)
    }

    /// Sum of squared differences against another frame of equal size.
    pub fn ssd(&self, other: &Frame) -> Result<f64> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }

    /// Copy out the window with top-left `(x0, y0)` and the given size.
    pub fn window(&self, x0: usize, y0: usize, height: usize, width: usize) -> Frame {
        let mut data = Vec::with_capacity(height * width);
        for y in y0..y0 + height {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + x0..row + x0 + width]);
        }
        Frame {
            height,
            width,
            data,
        }
    }
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Bilinear interpolation on a row-major grid, clamping coordinates to the
/// outermost pixel centers.
#[inline]
pub(crate) fn bilinear(data: &[f64], height: usize, width: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (width - 1) as f64);
    let y = y.clamp(0.0, (height - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let top = lerp(data[y0 * width + x0], data[y0 * width + x1], fx);
    let bottom = lerp(data[y1 * width + x0], data[y1 * width + x1], fx);
    lerp(top, bottom, fy)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        (1.0 - t) * a + t * b
    }
}

/// Number of frames, rows and columns of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDims {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
}

impl SeriesDims {
    pub const fn new(frames: usize, height: usize, width: usize) -> Self {
        Self {
            frames,
            height,
            width,
        }
    }

    /// Fixed grid the learned localizer expected as input (32 x 224 x 224).
    pub const NETWORK_INPUT: SeriesDims = SeriesDims::new(32, 224, 224);
}

/// Pixel spacing in mm per pixel along rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelSpacing {
    pub row: f64,
    pub col: f64,
}

impl PixelSpacing {
    pub const fn new(row: f64, col: f64) -> Self {
        Self { row, col }
    }

    pub const fn isotropic(mm: f64) -> Self {
        Self { row: mm, col: mm }
    }

    /// Physical length in mm of a pixel-space offset.
    pub fn physical_length(&self, dx: f64, dy: f64) -> f64 {
        let mx = dx * self.col;
        let my = dy * self.row;
        (mx * mx + my * my).sqrt()
    }
}

/// One cardiac cycle of 2-D frames with acquisition metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CineSeries {
    frames: Vec<Frame>,
    pixel_spacing: PixelSpacing,
    trigger_times: Vec<f64>,
    rr_interval: f64,
}

impl CineSeries {
    pub fn new(
        frames: Vec<Frame>,
        pixel_spacing: PixelSpacing,
        trigger_times: Vec<f64>,
        rr_interval: f64,
    ) -> Result<Self> {
        let series = Self {
            frames,
            pixel_spacing,
            trigger_times,
            rr_interval,
        };
        series.validate()?;
        Ok(series)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSeries(msg));
        if self.frames.len() < 2 {
            return bad(format!("need at least 2 frames, got {}", self.frames.len()));
        }
        let (h, w) = self.frames[0].dims();
        if h < MIN_FRAME_EDGE || w < MIN_FRAME_EDGE {
            return bad(format!("frames must be at least {MIN_FRAME_EDGE}x{MIN_FRAME_EDGE}, got {h}x{w}"));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.dims() != (h, w) {
                return bad(format!("frame {i} has dims {:?}, expected {:?}", f.dims(), (h, w)));
            }
            if f.data.iter().any(|v| !v.is_finite()) {
                return bad(format!("frame {i} contains non-finite intensities"));
            }
        }
        if self.trigger_times.len() != self.frames.len() {
            return Err(Error::LengthMismatch {
                expected: self.frames.len(),
                actual: self.trigger_times.len(),
            });
        }
        if self.trigger_times[0] != 0.0 {
            return bad("first trigger time must be 0".into());
        }
        if self.trigger_times.windows(2).any(|p| !(p[1] > p[0])) {
            return bad("trigger times must be strictly increasing".into());
        }
        if !self.rr_interval.is_finite() || *self.trigger_times.last().unwrap() >= self.rr_interval {
            return bad("last trigger time must be below the RR interval".into());
        }
        let s = self.pixel_spacing;
        if !(s.row > 0.0 && s.col > 0.0 && s.row.is_finite() && s.col.is_finite()) {
            return bad("pixel spacing must be positive".into());
        }
        Ok(())
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &Frame {
        &self.frames[t]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn dims(&self) -> SeriesDims {
        SeriesDims::new(self.len(), self.height(), self.width())
    }

    pub fn pixel_spacing(&self) -> PixelSpacing {
        self.pixel_spacing
    }

    pub fn trigger_times(&self) -> &[f64] {
        &self.trigger_times
    }

    pub fn rr_interval(&self) -> f64 {
        self.rr_interval
    }

    /// Mean frame-to-frame trigger interval in ms.
    pub fn temporal_resolution(&self) -> f64 {
        let t = &self.trigger_times;
        (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64
    }

    /// Same metadata with replaced frames (dims must stay identical).
    pub fn with_frames(&self, frames: Vec<Frame>) -> Result<Self> {
        CineSeries::new(frames, self.pixel_spacing, self.trigger_times.clone(), self.rr_interval)
    }
}

/// A per-frame target position.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LandmarkTrack {
    pub points: Vec<PixelPoint>,
}

impl LandmarkTrack {
    pub fn new(points: Vec<PixelPoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The same track expressed relative to a new origin.
    pub fn translated(&self, dx: f64, dy: f64) -> LandmarkTrack {
        LandmarkTrack::new(
            self.points
                .iter()
                .map(|p| PixelPoint::new(p.x + dx, p.y + dy))
                .collect(),
        )
    }
}

/// Axis-aligned region of interest with an integer top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub height: usize,
    pub width: usize,
}

impl Roi {
    pub fn origin(&self) -> PixelPoint {
        PixelPoint::new(self.x as f64, self.y as f64)
    }

    pub fn fits(&self, height: usize, width: usize) -> bool {
        self.height > 0 && self.width > 0 && self.y + self.height <= height && self.x + self.width <= width
    }
}

/// Intensity range seen by [`min_max_normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub min: f64,
    pub max: f64,
    /// Set when every intensity was equal; the output is then all zeros.
    pub constant_intensity: bool,
}

/// Rescale all intensities of a series into `[0, 1]` with one affine map.
pub fn min_max_normalize(series: &CineSeries) -> (CineSeries, NormalizationReport) {
    let (min, max) = series
        .frames
        .iter()
        .flat_map(|f| f.data.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let constant = max <= min;
    let range = max - min;
    let frames = series
        .frames
        .iter()
        .map(|f| Frame {
            height: f.height,
            width: f.width,
            data: if constant {
                vec![0.0; f.data.len()]
            } else {
                f.data.iter().map(|&v| ((v - min) / range).clamp(0.0, 1.0)).collect()
            },
        })
        .collect();
    let out = CineSeries {
        frames,
        pixel_spacing: series.pixel_spacing,
        trigger_times: series.trigger_times.clone(),
        rr_interval: series.rr_interval,
    };
    (
        out,
        NormalizationReport {
            min,
            max,
            constant_intensity: constant,
        },
    )
}

/// Source coordinate of destination index `i` under align-corners scaling.
#[inline]
fn source_coordinate(i: usize, src: usize, dst: usize) -> f64 {
    if dst <= 1 || src <= 1 {
        0.0
    } else {
        (i * (src - 1)) as f64 / (dst - 1) as f64
    }
}

fn bracket(coord: f64, n: usize) -> (usize, usize, f64) {
    let i0 = (coord.floor() as usize).min(n - 1);
    let i1 = (i0 + 1).min(n - 1);
    (i0, i1, coord - i0 as f64)
}

/// Trilinear resampling of a frame stack over `(t, y, x)`.
pub fn resample_frames(frames: &[Frame], target: SeriesDims) -> Result<Vec<Frame>> {
    if frames.is_empty() {
        return Err(Error::EmptyInput);
    }
    if target.frames < 2 || target.height < 2 || target.width < 2 {
        return Err(Error::InvalidParams(format!("resample target {target:?} must be at least 2 on every axis")));
    }
    let (h, w) = frames[0].dims();
    for f in frames {
        ensure_same_dims((h, w), f.dims())?;
    }
    let t_src = frames.len();
    if (t_src, h, w) == (target.frames, target.height, target.width) {
        return Ok(frames.to_vec());
    }

    let xs: Vec<_> = (0..target.width)
        .map(|i| bracket(source_coordinate(i, w, target.width), w))
        .collect();
    let ys: Vec<_> = (0..target.height)
        .map(|i| bracket(source_coordinate(i, h, target.height), h))
        .collect();

    let in_plane = |f: &Frame| -> Vec<f64> {
        let mut out = Vec::with_capacity(target.height * target.width);
        for &(y0, y1, fy) in &ys {
            for &(x0, x1, fx) in &xs {
                let top = lerp(f.get(x0, y0), f.get(x1, y0), fx);
                let bottom = lerp(f.get(x0, y1), f.get(x1, y1), fx);
                out.push(lerp(top, bottom, fy));
            }
        }
        out
    };
    let planes: Vec<Vec<f64>> = frames.iter().map(in_plane).collect();

    Ok((0..target.frames)
        .map(|k| {
            let (t0, t1, ft) = bracket(source_coordinate(k, t_src, target.frames), t_src);
            let data = planes[t0]
                .iter()
                .zip(&planes[t1])
                .map(|(&a, &b)| lerp(a, b, ft))
                .collect();
            Frame {
                height: target.height,
                width: target.width,
                data,
            }
        })
        .collect())
}

/// Bookkeeping that relates a resampled grid to its source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleMap {
    pub original: SeriesDims,
    pub resampled: SeriesDims,
}

impl ResampleMap {
    pub fn to_original(&self, p: PixelPoint) -> PixelPoint {
        map_point_resampled_to_original(
            p,
            (self.resampled.height, self.resampled.width),
            (self.original.height, self.original.width),
        )
    }

    pub fn to_resampled(&self, p: PixelPoint) -> PixelPoint {
        map_point_resampled_to_original(
            p,
            (self.original.height, self.original.width),
            (self.resampled.height, self.resampled.width),
        )
    }

    /// Fractional original frame index matching resampled frame `k`.
    pub fn original_frame_coordinate(&self, k: usize) -> f64 {
        source_coordinate(k, self.original.frames, self.resampled.frames)
    }
}

/// Trilinear resampling of a whole series to `target` dims.
///
/// Spacing scales by `H/H'` and `W/W'`; trigger times are linearly
/// interpolated on the align-corners time axis.
pub fn resample_series(series: &CineSeries, target: SeriesDims) -> Result<(CineSeries, ResampleMap)> {
    let frames = resample_frames(&series.frames, target)?;
    let src = series.dims();
    let t = &series.trigger_times;
    let trigger_times = (0..target.frames)
        .map(|k| {
            let (i0, i1, f) = bracket(source_coordinate(k, src.frames, target.frames), src.frames);
            lerp(t[i0], t[i1], f)
        })
        .collect();
    let spacing = PixelSpacing::new(
        series.pixel_spacing.row * src.height as f64 / target.height as f64,
        series.pixel_spacing.col * src.width as f64 / target.width as f64,
    );
    let out = CineSeries {
        frames,
        pixel_spacing: spacing,
        trigger_times,
        rr_interval: series.rr_interval,
    };
    Ok((
        out,
        ResampleMap {
            original: src,
            resampled: target,
        },
    ))
}

/// Map a point from a `from` grid (rows, cols) onto a `to` grid using the
/// `(N-1)/(N'-1)` scale per axis.
pub fn map_point_resampled_to_original(p: PixelPoint, from: (usize, usize), to: (usize, usize)) -> PixelPoint {
    let scale = |v: f64, src: usize, dst: usize| {
        if src <= 1 || dst <= 1 {
            0.0
        } else {
            v * (dst - 1) as f64 / (src - 1) as f64
        }
    };
    if from == to {
        return p;
    }
    PixelPoint::new(scale(p.x, from.1, to.1), scale(p.y, from.0, to.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from(values: &[Vec<f64>], h: usize, w: usize) -> CineSeries {
        let frames = values
            .iter()
            .map(|v| Frame::new(h, w, v.clone()).unwrap())
            .collect::<Vec<_>>();
        let times = (0..frames.len()).map(|k| k as f64 * 40.0).collect();
        CineSeries::new(frames, PixelSpacing::isotropic(1.0), times, 1000.0).unwrap()
    }

    #[test]
    fn rejects_invalid_series() {
        let f = Frame::zeros(8, 8);
        let sp = PixelSpacing::isotropic(1.0);
        assert!(CineSeries::new(vec![f.clone()], sp, vec![0.0], 100.0).is_err());
        assert!(CineSeries::new(vec![f.clone(), f.clone()], sp, vec![0.0, 0.0], 100.0).is_err());
        assert!(CineSeries::new(vec![f.clone(), f.clone()], sp, vec![1.0, 2.0], 100.0).is_err());
        assert!(CineSeries::new(vec![f.clone(), f.clone()], sp, vec![0.0, 100.0], 100.0).is_err());
        assert!(CineSeries::new(vec![f.clone(), f.clone()], PixelSpacing::isotropic(0.0), vec![0.0, 1.0], 100.0).is_err());
        let small = Frame::zeros(4, 8);
        assert!(CineSeries::new(vec![small.clone(), small], sp, vec![0.0, 1.0], 100.0).is_err());
        let mut nan = Frame::zeros(8, 8);
        nan.set(1, 1, f64::NAN);
        assert!(CineSeries::new(vec![f.clone(), nan], sp, vec![0.0, 1.0], 100.0).is_err());
        assert!(CineSeries::new(vec![f.clone(), f], sp, vec![0.0, 1.0], 100.0).is_ok());
    }

    #[test]
    fn normalize_affine_endpoints() {
        let mut a = vec![2.0; 64];
        a[5] = 6.0;
        let s = series_from(&[a.clone(), a], 8, 8);
        let (n, rep) = min_max_normalize(&s);
        assert_eq!((rep.min, rep.max, rep.constant_intensity), (2.0, 6.0, false));
        assert_eq!(n.frame(0).get(5, 0), 1.0);
        assert_eq!(n.frame(0).get(0, 0), 0.0);
        assert_eq!(n.trigger_times(), s.trigger_times());
    }

    #[test]
    fn normalize_matches_affine_oracle() {
        let mut a = vec![5.0; 64];
        a[0] = 0.0;
        a[1] = 10.0;
        let s = series_from(&[a.clone(), a.clone()], 8, 8);
        let (n, _) = min_max_normalize(&s);
        for (out, v) in n.frame(1).data().iter().zip(&a) {
            assert_eq!(*out, (v - 0.0) / (10.0 - 0.0));
        }
        assert_eq!(&n.frame(1).data()[..3], &[0.0, 1.0, 0.5]);
    }

    #[test]
    fn normalize_constant_series_flags() {
        let s = series_from(&[vec![3.0; 64], vec![3.0; 64]], 8, 8);
        let (n, rep) = min_max_normalize(&s);
        assert!(rep.constant_intensity);
        assert!(n.frames().iter().all(|f| f.data().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn normalize_is_idempotent() {
        let a: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() * 4.0 + 1.0).collect();
        let b: Vec<f64> = (0..64).map(|i| (i as f64 * 0.11).cos() * 2.0).collect();
        let s = series_from(&[a, b], 8, 8);
        let (n1, _) = min_max_normalize(&s);
        let (n2, _) = min_max_normalize(&n1);
        for (f1, f2) in n1.frames().iter().zip(n2.frames()) {
            for (x, y) in f1.data().iter().zip(f2.data()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn resample_identity_is_bitwise() {
        let a: Vec<f64> = (0..100).map(|i| (i as f64).sqrt()).collect();
        let s = series_from(&[a.clone(), a.iter().map(|v| v * 2.0).collect()], 10, 10);
        let (r, _) = resample_series(&s, s.dims()).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn resample_checkerboard_keeps_corners() {
        let f = Frame::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = resample_frames(&[f.clone(), f], SeriesDims::new(2, 4, 4)).unwrap();
        let g = &out[0];
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(3, 0), 0.0);
        assert_eq!(g.get(0, 3), 0.0);
        assert_eq!(g.get(3, 3), 1.0);
        // interior is a bilinear blend
        assert!((g.get(1, 1) - (4.0 / 9.0 + 1.0 / 9.0)).abs() < 1e-12);
    }

    #[test]
    fn resample_to_network_grid() {
        let frames: Vec<Vec<f64>> = (0..10).map(|k| vec![k as f64; 16 * 20]).collect();
        let s = series_from(&frames, 16, 20);
        let (r, map) = resample_series(&s, SeriesDims::NETWORK_INPUT).unwrap();
        assert_eq!(r.dims(), SeriesDims::new(32, 224, 224));
        assert_eq!(r.trigger_times()[0], 0.0);
        assert!((r.trigger_times()[31] - 360.0).abs() < 1e-9);
        // frame intensity follows the linear time interpolation
        let k = 11;
        let expected = map.original_frame_coordinate(k);
        assert!((r.frame(k).get(100, 100) - expected).abs() < 1e-12);
        assert!((r.pixel_spacing().row - 16.0 / 224.0).abs() < 1e-15);
        assert!((r.pixel_spacing().col - 20.0 / 224.0).abs() < 1e-15);
    }

    #[test]
    fn point_mapping_conventions() {
        let origin = PixelPoint::new(0.0, 0.0);
        assert_eq!(map_point_resampled_to_original(origin, (224, 224), (97, 311)), origin);
        let p = PixelPoint::new(12.25, 7.5);
        assert_eq!(map_point_resampled_to_original(p, (50, 60), (50, 60)), p);
        // 224 -> 448 under align corners: 223 * 447 / 223
        let q = map_point_resampled_to_original(PixelPoint::new(223.0, 223.0), (224, 224), (448, 448));
        assert_eq!(q, PixelPoint::new(447.0, 447.0));
    }

    #[test]
    fn point_mapping_round_trips() {
        let dims = [(224, 224), (97, 311), (448, 400), (33, 8)];
        for &a in &dims {
            for &b in &dims {
                for i in 0..20 {
                    let p = PixelPoint::new(i as f64 * 1.37 % 8.0, i as f64 * 0.91 % 8.0);
                    let back = map_point_resampled_to_original(map_point_resampled_to_original(p, a, b), b, a);
                    assert!((back.x - p.x).abs() < 1e-9 && (back.y - p.y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn bilinear_clamps_to_border() {
        let f = Frame::from_fn(8, 8, |x, _| x as f64);
        assert_eq!(f.sample(-3.0, 2.0), 0.0);
        assert_eq!(f.sample(20.0, 2.0), 7.0);
        assert!((f.sample(2.25, 3.5) - 2.25).abs() < 1e-12);
    }
}
