//! Target localization.
//!
//! [`Localizer`] is the contract any localizer satisfies: one in-bounds point
//! per frame. Two classical trackers implement it. Both start from a single
//! annotated point in frame 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CineSeries, Frame, LandmarkTrack, PixelPoint, PixelSpacing};
use crate::registration::{propagate_landmark, register_series, RegistrationParams};

/// Anything that maps a series to one target position per frame.
pub trait Localizer {
    fn locate(&self, series: &CineSeries) -> Result<LandmarkTrack>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemplateTrackerParams {
    /// Half-size of the square template window.
    pub template_radius: usize,
    /// Maximum integer displacement searched per frame along each axis.
    pub search_radius: usize,
}

impl Default for TemplateTrackerParams {
    fn default() -> Self {
        Self {
            template_radius: 6,
            search_radius: 4,
        }
    }
}

/// Frame-to-frame normalized cross-correlation tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct NccTemplateTracker {
    pub start: PixelPoint,
    pub params: TemplateTrackerParams,
}

impl Localizer for NccTemplateTracker {
    fn locate(&self, series: &CineSeries) -> Result<LandmarkTrack> {
        ncc_template_track(series, self.start, &self.params)
    }
}

/// Point propagation through consecutive deformation fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationLocalizer {
    pub start: PixelPoint,
    pub params: RegistrationParams,
}

impl Localizer for PropagationLocalizer {
    fn locate(&self, series: &CineSeries) -> Result<LandmarkTrack> {
        propagation_localizer(series, self.start, &self.params)
    }
}

/// Zero-mean window sampled bilinearly around a fractional center.
fn sample_window(frame: &Frame, center: PixelPoint, radius: usize) -> Vec<f64> {
    let r = radius as isize;
    let mut out = Vec::with_capacity((2 * radius + 1).pow(2));
    for j in -r..=r {
        for i in -r..=r {
            out.push(frame.sample(center.x + i as f64, center.y + j as f64));
        }
    }
    let mean = out.iter().sum::<f64>() / out.len() as f64;
    out.iter_mut().for_each(|v| *v -= mean);
    out
}

fn energy(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn ncc(template: &[f64], template_energy: f64, window: &[f64]) -> f64 {
    let e = energy(window);
    if e <= 0.0 {
        return 0.0;
    }
    let dot: f64 = template.iter().zip(window).map(|(a, b)| a * b).sum();
    dot / (template_energy * e).sqrt()
}

/// Vertex offset of a parabola through `(-1, m)`, `(0, c)`, `(1, p)`.
fn parabolic_offset(m: f64, c: f64, p: f64) -> f64 {
    let denom = m - 2.0 * c + p;
    if denom >= 0.0 {
        // not a maximum
        return 0.0;
    }
    (0.5 * (m - p) / denom).clamp(-0.5, 0.5)
}

/// Track a point by matching a template from each frame into the next.
pub fn ncc_template_track(series: &CineSeries, p0: PixelPoint, params: &TemplateTrackerParams) -> Result<LandmarkTrack> {
    let (h, w) = (series.height(), series.width());
    let r = params.template_radius as f64;
    if params.template_radius < 1 || params.search_radius < 1 {
        return Err(Error::InvalidParams("template and search radius must be at least 1".into()));
    }
    if !p0.is_finite() || p0.x - r < 0.0 || p0.y - r < 0.0 || p0.x + r > (w - 1) as f64 || p0.y + r > (h - 1) as f64 {
        return Err(Error::TemplateOutOfBounds { point: p0 });
    }
    let s = params.search_radius as isize;
    let side = (2 * s + 1) as usize;
    let mut points = vec![p0];
    let mut p = p0;
    for t in 0..series.len() - 1 {
        let template = sample_window(series.frame(t), p, params.template_radius);
        let te = energy(&template);
        if te <= 1e-18 {
            return Err(Error::FlatTemplate);
        }
        let next = series.frame(t + 1);
        let mut scores = vec![f64::NEG_INFINITY; side * side];
        let mut best = (0isize, 0isize, f64::NEG_INFINITY);
        for j in -s..=s {
            for i in -s..=s {
                let c = PixelPoint::new(p.x + i as f64, p.y + j as f64);
                let score = ncc(&template, te, &sample_window(next, c, params.template_radius));
                scores[((j + s) as usize) * side + (i + s) as usize] = score;
                if score > best.2 {
                    best = (i, j, score);
                }
            }
        }
        let (bi, bj, bs) = best;
        let at = |i: isize, j: isize| scores[((j + s) as usize) * side + (i + s) as usize];
        let ox = if bi > -s && bi < s {
            parabolic_offset(at(bi - 1, bj), bs, at(bi + 1, bj))
        } else {
            0.0
        };
        let oy = if bj > -s && bj < s {
            parabolic_offset(at(bi, bj - 1), bs, at(bi, bj + 1))
        } else {
            0.0
        };
        let integer = PixelPoint::new(p.x + bi as f64, p.y + bj as f64);
        let refined = PixelPoint::new(integer.x + ox, integer.y + oy);
        // keep the sub-pixel estimate only if it correlates better
        let refined_score = ncc(&template, te, &sample_window(next, refined, params.template_radius));
        p = if refined_score > bs { refined } else { integer }.clamped(h, w);
        points.push(p);
    }
    Ok(LandmarkTrack::new(points))
}

/// Register consecutive frames and carry `p0` through the fields.
pub fn propagation_localizer(series: &CineSeries, p0: PixelPoint, params: &RegistrationParams) -> Result<LandmarkTrack> {
    if !p0.is_inside(series.height(), series.width()) {
        return Err(Error::PointOutOfBounds { point: p0 });
    }
    let fields = register_series(series, params)?;
    Ok(propagate_landmark(p0, &fields)?.track)
}

/// Mean and population standard deviation over datasets of the per-dataset
/// mean Euclidean error in mm.
pub fn distance_error(predicted: &[LandmarkTrack], truth: &[LandmarkTrack], spacing: PixelSpacing) -> Result<(f64, f64)> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut per_dataset = Vec::with_capacity(truth.len());
    for (p, t) in predicted.iter().zip(truth) {
        if p.len() != t.len() {
            return Err(Error::LengthMismatch {
                expected: t.len(),
                actual: p.len(),
            });
        }
        if t.is_empty() {
            return Err(Error::EmptyInput);
        }
        let sum: f64 = p
            .points
            .iter()
            .zip(&t.points)
            .map(|(a, b)| spacing.physical_length(a.x - b.x, a.y - b.y))
            .sum();
        per_dataset.push(sum / t.len() as f64);
    }
    Ok(crate::stats::mean_std(&per_dataset))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(points: &[(f64, f64)]) -> LandmarkTrack {
        LandmarkTrack::new(points.iter().map(|&(x, y)| PixelPoint::new(x, y)).collect())
    }

    #[test]
    fn distance_error_identity_is_zero() {
        let a = track(&[(1.0, 2.0), (3.0, 4.5)]);
        assert_eq!(distance_error(&[a.clone()], &[a], PixelSpacing::isotropic(1.3)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn distance_error_constant_offset() {
        let t = track(&[(10.0, 10.0), (12.0, 11.0), (14.0, 9.0)]);
        let p = t.translated(3.0, 0.0);
        let (m, s) = distance_error(&[p], &[t], PixelSpacing::isotropic(1.0)).unwrap();
        assert!((m - 3.0).abs() < 1e-12);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn distance_error_population_std_across_datasets() {
        let t1 = track(&[(0.0, 0.0), (5.0, 5.0)]);
        let t2 = track(&[(2.0, 2.0), (7.0, 1.0)]);
        let p1 = t1.translated(0.0, 1.0);
        let p2 = t2.translated(3.0, 0.0);
        let (m, s) = distance_error(&[p1, p2], &[t1, t2], PixelSpacing::isotropic(1.0)).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_error_scales_with_spacing_and_checks_lengths() {
        let t = track(&[(0.0, 0.0)]);
        let (m, _) = distance_error(&[t.translated(0.0, 2.0)], &[t.clone()], PixelSpacing::new(1.5, 0.5)).unwrap();
        assert!((m - 3.0).abs() < 1e-12);
        assert!(matches!(
            distance_error(&[track(&[(0.0, 0.0), (1.0, 1.0)])], &[t.clone()], PixelSpacing::isotropic(1.0)),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(distance_error(&[], &[t], PixelSpacing::isotropic(1.0)).is_err());
    }

    #[test]
    fn flat_frames_are_rejected() {
        let f = Frame::from_fn(32, 32, |_, _| 0.4);
        let s = CineSeries::new(vec![f.clone(), f], PixelSpacing::isotropic(1.0), vec![0.0, 30.0], 100.0).unwrap();
        assert_eq!(
            ncc_template_track(&s, PixelPoint::new(16.0, 16.0), &TemplateTrackerParams::default()),
            Err(Error::FlatTemplate)
        );
    }

    #[test]
    fn template_must_fit_in_frame() {
        let f = Frame::from_fn(32, 32, |x, y| (x * y) as f64);
        let s = CineSeries::new(vec![f.clone(), f], PixelSpacing::isotropic(1.0), vec![0.0, 30.0], 100.0).unwrap();
        assert!(matches!(
            ncc_template_track(&s, PixelPoint::new(2.0, 16.0), &TemplateTrackerParams::default()),
            Err(Error::TemplateOutOfBounds { .. })
        ));
    }

    #[test]
    fn parabola_vertex() {
        // samples of -(x - 0.25)^2
        let f = |x: f64| -(x - 0.25f64).powi(2);
        assert!((parabolic_offset(f(-1.0), f(0.0), f(1.0)) - 0.25).abs() < 1e-12);
        assert_eq!(parabolic_offset(1.0, 0.0, 1.0), 0.0);
    }
}
