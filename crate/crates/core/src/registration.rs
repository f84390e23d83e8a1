//! Dense elastic registration of consecutive frames.
//!
//! The engine is a symmetric-gradient demons scheme: each iteration computes
//! an SSD-driven update force, adds it to the displacement field and smooths
//! the field with a Gaussian (diffusion-like regularization). It runs
//! coarse-to-fine over an image pyramid.
//!
//! A field `d` registers `moving` onto `fixed` when `moving(x + d(x))`
//! approximates `fixed(x)`; a point at `x` in the fixed frame therefore sits
//! at `x + d(x)` in the moving frame.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{convolve_separable, downsample, gaussian_kernel, gradient};
use crate::model::{bilinear, ensure_same_dims, CineSeries, Frame, LandmarkTrack, PixelPoint};

/// Coarsest pyramid level edge allowed.
const MIN_LEVEL_EDGE: usize = 8;

/// Dense per-pixel displacement between one pair of frames, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationField {
    height: usize,
    width: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
    /// `(t, t + 1)` for consecutive-frame registration.
    pub frame_pair: (usize, usize),
}

impl DeformationField {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            dx: vec![0.0; height * width],
            dy: vec![0.0; height * width],
            frame_pair: (0, 1),
        }
    }

    /// Constant displacement everywhere.
    pub fn uniform(height: usize, width: usize, dx: f64, dy: f64) -> Self {
        Self {
            height,
            width,
            dx: vec![dx; height * width],
            dy: vec![dy; height * width],
            frame_pair: (0, 1),
        }
    }

    pub fn from_components(height: usize, width: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        for c in [&dx, &dy] {
            if c.len() != height * width {
                return Err(Error::LengthMismatch {
                    expected: height * width,
                    actual: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams("deformation field must be finite".into()));
            }
        }
        Ok(Self {
            height,
            width,
            dx,
            dy,
            frame_pair: (0, 1),
        })
    }

    pub fn with_pair(mut self, pair: (usize, usize)) -> Self {
        self.frame_pair = pair;
        self
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.dx[i], self.dy[i])
    }

    /// Bilinear interpolation of the field at a fractional position.
    pub fn sample(&self, p: PixelPoint) -> (f64, f64) {
        (
            bilinear(&self.dx, self.height, self.width, p.x, p.y),
            bilinear(&self.dy, self.height, self.width, p.x, p.y),
        )
    }

    /// Row-major `|d(x)|`.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.dx
            .iter()
            .zip(&self.dy)
            .map(|(&x, &y)| (x * x + y * y).sqrt())
            .collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes().into_iter().fold(0.0, f64::max)
    }

    /// Every vector multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            dx: self.dx.iter().map(|v| v * k).collect(),
            dy: self.dy.iter().map(|v| v * k).collect(),
            frame_pair: self.frame_pair,
        }
    }

    /// Frobenius norm of the discrete Jacobian of `d` per pixel.
    pub fn gradient_magnitudes(&self) -> Vec<f64> {
        let (xx, xy) = gradient(&self.dx, self.height, self.width);
        let (yx, yy) = gradient(&self.dy, self.height, self.width);
        (0..self.dx.len())
            .map(|i| (xx[i] * xx[i] + xy[i] * xy[i] + yx[i] * yx[i] + yy[i] * yy[i]).sqrt())
            .collect()
    }

    fn smooth(&mut self, kernel: &[f64]) {
        convolve_separable(&mut self.dx, self.height, self.width, kernel);
        convolve_separable(&mut self.dy, self.height, self.width, kernel);
    }

    /// Lift a field from a pyramid level onto the next finer level, where
    /// fine pixel `X` sits on coarse pixel `X / 2`.
    fn upsample(&self, height: usize, width: usize) -> Self {
        let mut dx = Vec::with_capacity(height * width);
        let mut dy = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                let (cx, cy) = (x as f64 * 0.5, y as f64 * 0.5);
                dx.push(2.0 * bilinear(&self.dx, self.height, self.width, cx, cy));
                dy.push(2.0 * bilinear(&self.dy, self.height, self.width, cx, cy));
            }
        }
        Self {
            height,
            width,
            dx,
            dy,
            frame_pair: self.frame_pair,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegistrationParams {
    pub pyramid_levels: usize,
    pub iterations_per_level: usize,
    /// Gaussian sigma (pixels) applied to the field after every update.
    pub smoothing_sigma: f64,
    /// Multiplier on the demons force.
    pub update_step: f64,
    /// A level stops once the mean update magnitude drops below this (pixels).
    pub convergence_tol: f64,
}

impl Default for RegistrationParams {
    fn default() -> Self {
        Self {
            pyramid_levels: 3,
            iterations_per_level: 50,
            smoothing_sigma: 2.0,
            update_step: 1.0,
            convergence_tol: 1e-3,
        }
    }
}

impl RegistrationParams {
    pub fn validate(&self) -> Result<()> {
        if self.pyramid_levels == 0 {
            return Err(Error::InvalidParams("pyramid_levels must be at least 1".into()));
        }
        if !(self.smoothing_sigma >= 0.0) {
            return Err(Error::InvalidParams("smoothing_sigma must be non-negative".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidParams("convergence_tol must be positive".into()));
        }
        if !(self.update_step > 0.0 && self.update_step.is_finite()) {
            return Err(Error::InvalidParams("update_step must be positive".into()));
        }
        Ok(())
    }
}

/// Sample `moving` at `x + d(x)` with bilinear interpolation and clamped borders.
pub fn warp_image(moving: &Frame, field: &DeformationField) -> Result<Frame> {
    ensure_same_dims(moving.dims(), field.dims())?;
    let (h, w) = moving.dims();
    Ok(Frame::from_fn(h, w, |x, y| {
        let (dx, dy) = field.at(x, y);
        moving.sample(x as f64 + dx, y as f64 + dy)
    }))
}

fn build_pyramid(frame: &Frame, levels: usize) -> Vec<Frame> {
    let mut out = vec![frame.clone()];
    while out.len() < levels {
        let last = out.last().unwrap();
        if last.height().div_ceil(2) < MIN_LEVEL_EDGE || last.width().div_ceil(2) < MIN_LEVEL_EDGE {
            break;
        }
        out.push(downsample(last));
    }
    out
}

/// Run demons iterations on one level, returning the best field seen when
/// `track_best` is set (by SSD) and the last field otherwise.
fn demons_level(
    fixed: &Frame,
    moving: &Frame,
    mut field: DeformationField,
    params: &RegistrationParams,
    kernel: &[f64],
    track_best: bool,
) -> DeformationField {
    let (h, w) = fixed.dims();
    let n = (h * w) as f64;
    let (fgx, fgy) = gradient(fixed.data(), h, w);
    let mut best: Option<(f64, DeformationField)> = None;

    for _ in 0..params.iterations_per_level {
        let warped = warp_image(moving, &field).expect("level dims match");
        let (wgx, wgy) = gradient(warped.data(), h, w);
        let mut ssd = 0.0;
        let mut total_update = 0.0;
        let mut ux = vec![0.0; h * w];
        let mut uy = vec![0.0; h * w];
        for i in 0..h * w {
            let diff = warped.data()[i] - fixed.data()[i];
            ssd += diff * diff;
            let jx = 0.5 * (fgx[i] + wgx[i]);
            let jy = 0.5 * (fgy[i] + wgy[i]);
            let denom = jx * jx + jy * jy + diff * diff;
            if denom > 1e-12 {
                let s = -params.update_step * diff / denom;
                ux[i] = s * jx;
                uy[i] = s * jy;
                total_update += (ux[i] * ux[i] + uy[i] * uy[i]).sqrt();
            }
        }
        if track_best && best.as_ref().is_none_or(|(b, _)| ssd < *b) {
            best = Some((ssd, field.clone()));
        }
        if total_update / n < params.convergence_tol {
            break;
        }
        for i in 0..h * w {
            field.dx[i] += ux[i];
            field.dy[i] += uy[i];
        }
        field.smooth(kernel);
    }

    if track_best {
        let final_ssd = warp_image(moving, &field).and_then(|wp| wp.ssd(fixed)).expect("level dims match");
        match best {
            Some((b, f)) if b < final_ssd => f,
            _ => field,
        }
    } else {
        field
    }
}

/// Register `moving` onto `fixed`.
///
/// The returned field never increases SSD over the zero field.
pub fn register_pair(fixed: &Frame, moving: &Frame, params: &RegistrationParams) -> Result<DeformationField> {
    ensure_same_dims(fixed.dims(), moving.dims())?;
    params.validate()?;
    let fixed_pyr = build_pyramid(fixed, params.pyramid_levels);
    let moving_pyr = build_pyramid(moving, params.pyramid_levels);
    let kernel = gaussian_kernel(params.smoothing_sigma);

    let coarsest = fixed_pyr.last().unwrap();
    let mut field = DeformationField::zeros(coarsest.height(), coarsest.width());
    for level in (0..fixed_pyr.len()).rev() {
        let f = &fixed_pyr[level];
        if field.dims() != f.dims() {
            field = field.upsample(f.height(), f.width());
        }
        field = demons_level(f, &moving_pyr[level], field, params, &kernel, level == 0);
    }

    let initial = fixed.ssd(moving)?;
    let registered = warp_image(moving, &field)?.ssd(fixed)?;
    if registered > initial {
        field = DeformationField::zeros(fixed.height(), fixed.width());
    }
    Ok(field)
}

/// Register every consecutive pair `(k, k + 1)` of a series.
pub fn register_series(series: &CineSeries, params: &RegistrationParams) -> Result<Vec<DeformationField>> {
    params.validate()?;
    let frames = series.frames();
    (0..frames.len() - 1)
        .into_par_iter()
        .map(|k| register_pair(&frames[k], &frames[k + 1], params).map(|f| f.with_pair((k, k + 1))))
        .collect()
}

/// Result of landmark propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub track: LandmarkTrack,
    /// Frames whose propagated point left the image and was clamped back.
    pub clamped_frames: Vec<usize>,
}

impl Propagation {
    /// The track, or `PointOutOfBounds` if any point had to be clamped.
    pub fn strict(self) -> Result<LandmarkTrack> {
        match self.clamped_frames.first() {
            Some(&k) => Err(Error::PointOutOfBounds {
                point: self.track.points[k],
            }),
            None => Ok(self.track),
        }
    }
}

/// Carry a point through consecutive fields: `p[t+1] = p[t] + d_t(p[t])`.
pub fn propagate_landmark(p0: PixelPoint, fields: &[DeformationField]) -> Result<Propagation> {
    let (h, w) = match fields.first() {
        Some(f) => f.dims(),
        None => {
            return Ok(Propagation {
                track: LandmarkTrack::new(vec![p0]),
                clamped_frames: Vec::new(),
            })
        }
    };
    if !p0.is_inside(h, w) {
        return Err(Error::PointOutOfBounds { point: p0 });
    }
    let mut points = vec![p0];
    let mut clamped_frames = Vec::new();
    let mut p = p0;
    for (k, field) in fields.iter().enumerate() {
        ensure_same_dims((h, w), field.dims())?;
        let (dx, dy) = field.sample(p);
        let next = PixelPoint::new(p.x + dx, p.y + dy);
        p = if next.x < 0.0 || next.y < 0.0 || next.x > (w - 1) as f64 || next.y > (h - 1) as f64 || !next.is_finite() {
            clamped_frames.push(k + 1);
            next.clamped(h, w)
        } else {
            next
        };
        points.push(p);
    }
    Ok(Propagation {
        track: LandmarkTrack::new(points),
        clamped_frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth_disk(h: usize, w: usize, cx: f64, cy: f64, r: f64) -> Frame {
        Frame::from_fn(h, w, |x, y| {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            0.1 + 0.8 / (1.0 + ((d - r) / 1.5).exp())
        })
    }

    #[test]
    fn identical_frames_give_zero_field() {
        let f = smooth_disk(40, 40, 20.0, 19.0, 7.0);
        let d = register_pair(&f, &f, &RegistrationParams::default()).unwrap();
        assert!(d.max_magnitude() <= 0.05);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = Frame::zeros(16, 16);
        let b = Frame::zeros(16, 17);
        assert!(matches!(
            register_pair(&a, &b, &RegistrationParams::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(warp_image(&a, &DeformationField::zeros(3, 3)).is_err());
    }

    #[test]
    fn warp_zero_field_is_identity() {
        let f = smooth_disk(20, 24, 10.0, 9.0, 4.0);
        assert_eq!(warp_image(&f, &DeformationField::zeros(20, 24)).unwrap(), f);
    }

    #[test]
    fn warp_uniform_shift_on_ramp() {
        let f = Frame::from_fn(16, 16, |x, _| x as f64);
        let out = warp_image(&f, &DeformationField::uniform(16, 16, 1.0, 0.0)).unwrap();
        for y in 0..16 {
            for x in 0..15 {
                assert!((out.get(x, y) - (f.get(x, y) + 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn registration_reduces_residual() {
        let fixed = smooth_disk(48, 48, 24.0, 24.0, 8.0);
        let moving = smooth_disk(48, 48, 25.7, 22.9, 8.0);
        let d = register_pair(&fixed, &moving, &RegistrationParams::default()).unwrap();
        let before = fixed.ssd(&moving).unwrap();
        let after = warp_image(&moving, &d).unwrap().ssd(&fixed).unwrap();
        assert!(after <= before * 0.05, "{after} vs {before}");
    }

    #[test]
    fn series_yields_one_field_per_transition() {
        let frames = vec![smooth_disk(24, 24, 12.0, 12.0, 5.0), smooth_disk(24, 24, 13.0, 12.0, 5.0)];
        let s = CineSeries::new(frames, crate::model::PixelSpacing::isotropic(1.0), vec![0.0, 40.0], 100.0).unwrap();
        let fields = register_series(&s, &RegistrationParams::default()).unwrap();
        assert_eq!(fields.len(), 1);
        assert_eq!(fields[0].frame_pair, (0, 1));
    }

    #[test]
    fn propagation_composes_additively() {
        let fields = vec![DeformationField::uniform(32, 32, 1.0, 1.0); 3];
        let p = propagate_landmark(PixelPoint::new(10.0, 10.0), &fields).unwrap();
        let expected: Vec<_> = (0..4).map(|i| PixelPoint::new(10.0 + i as f64, 10.0 + i as f64)).collect();
        assert_eq!(p.track.points, expected);
        assert!(p.clamped_frames.is_empty());

        let still = propagate_landmark(PixelPoint::new(3.5, 4.25), &vec![DeformationField::zeros(16, 16); 5]).unwrap();
        assert!(still.track.points.iter().all(|q| *q == PixelPoint::new(3.5, 4.25)));
    }

    #[test]
    fn propagation_clamps_and_flags() {
        let fields = vec![DeformationField::uniform(16, 16, 4.0, 0.0); 4];
        let p = propagate_landmark(PixelPoint::new(8.0, 8.0), &fields).unwrap();
        assert_eq!(p.clamped_frames, vec![2, 3, 4]);
        assert_eq!(p.track.points[4], PixelPoint::new(15.0, 8.0));
        assert!(matches!(p.strict(), Err(Error::PointOutOfBounds { .. })));
        assert!(propagate_landmark(PixelPoint::new(-1.0, 3.0), &fields).is_err());
    }

    #[test]
    fn params_validation() {
        let bad = RegistrationParams {
            pyramid_levels: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RegistrationParams {
            convergence_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
