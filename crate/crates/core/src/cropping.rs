//! Fixed physical-size ROI around a landmark track.

use crate::error::{Error, Result};
use crate::model::{CineSeries, LandmarkTrack, PixelSpacing, Roi};

/// Default ROI edge lengths in mm (rows, columns).
pub const DEFAULT_ROI_MM: (f64, f64) = (50.0, 50.0);

/// Nearest even pixel count, at least 2.
fn even_pixels(mm: f64, spacing: f64) -> usize {
    let half = (mm / spacing / 2.0).round().max(1.0);
    2 * half as usize
}

/// One box for the whole series, centered on the midpoint of the track's
/// per-axis extremes. The box keeps its size and is shifted inward when it
/// would cross the border.
pub fn roi_from_track(
    track: &LandmarkTrack,
    frame_dims: (usize, usize),
    spacing: PixelSpacing,
    roi_size_mm: (f64, f64),
) -> Result<Roi> {
    if track.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (h, w) = frame_dims;
    if let Some(p) = track.points.iter().find(|p| !p.is_inside(h, w)) {
        return Err(Error::PointOutOfBounds { point: *p });
    }
    if !(roi_size_mm.0 > 0.0 && roi_size_mm.1 > 0.0) {
        return Err(Error::InvalidParams("ROI size must be positive".into()));
    }
    let height = even_pixels(roi_size_mm.0, spacing.row);
    let width = even_pixels(roi_size_mm.1, spacing.col);
    if height > h || width > w {
        return Err(Error::RoiLargerThanImage {
            roi: (height, width),
            frame: (h, w),
        });
    }
    let (min_x, max_x, min_y, max_y) = track.points.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), p| (a.min(p.x), b.max(p.x), c.min(p.y), d.max(p.y)),
    );
    let cx = 0.5 * (min_x + max_x);
    let cy = 0.5 * (min_y + max_y);
    let place = |center: f64, size: usize, limit: usize| -> usize {
        let origin = (center - size as f64 / 2.0).round();
        origin.clamp(0.0, (limit - size) as f64) as usize
    };
    Ok(Roi {
        x: place(cx, width, w),
        y: place(cy, height, h),
        height,
        width,
    })
}

/// Crop every frame of a series to the same ROI.
pub fn crop_series(series: &CineSeries, roi: &Roi) -> Result<CineSeries> {
    if !roi.fits(series.height(), series.width()) {
        return Err(Error::RoiOutOfBounds {
            x: roi.x,
            y: roi.y,
            height: roi.height,
            width: roi.width,
        });
    }
    if roi.x == 0 && roi.y == 0 && roi.height == series.height() && roi.width == series.width() {
        return Ok(series.clone());
    }
    let frames = series
        .frames()
        .iter()
        .map(|f| f.window(roi.x, roi.y, roi.height, roi.width))
        .collect();
    series.with_frames(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Frame, PixelPoint};

    fn constant_track(x: f64, y: f64, n: usize) -> LandmarkTrack {
        LandmarkTrack::new(vec![PixelPoint::new(x, y); n])
    }

    #[test]
    fn default_roi_around_constant_track() {
        let roi = roi_from_track(&constant_track(100.0, 100.0, 5), (256, 256), PixelSpacing::isotropic(1.0), DEFAULT_ROI_MM).unwrap();
        assert_eq!(roi, Roi { x: 75, y: 75, height: 50, width: 50 });
    }

    #[test]
    fn center_is_midpoint_of_extremes() {
        let track = LandmarkTrack::new(vec![
            PixelPoint::new(90.0, 95.0),
            PixelPoint::new(110.0, 100.0),
            PixelPoint::new(95.0, 105.0),
            PixelPoint::new(92.0, 97.0),
        ]);
        let roi = roi_from_track(&track, (256, 256), PixelSpacing::isotropic(1.0), (20.0, 20.0)).unwrap();
        assert_eq!((roi.x + roi.width / 2, roi.y + roi.height / 2), (100, 100));
    }

    #[test]
    fn size_rounds_to_even_pixels() {
        let roi = roi_from_track(&constant_track(60.0, 60.0, 2), (128, 128), PixelSpacing::isotropic(2.0), DEFAULT_ROI_MM).unwrap();
        assert_eq!((roi.height, roi.width), (26, 26));
        let roi = roi_from_track(&constant_track(60.0, 60.0, 2), (128, 128), PixelSpacing::new(1.5, 1.0), DEFAULT_ROI_MM).unwrap();
        assert_eq!((roi.height, roi.width), (34, 50));
    }

    #[test]
    fn box_shifts_inward_at_borders() {
        let roi = roi_from_track(&constant_track(3.0, 120.0, 2), (128, 128), PixelSpacing::isotropic(1.0), DEFAULT_ROI_MM).unwrap();
        assert_eq!(roi, Roi { x: 0, y: 78, height: 50, width: 50 });
        assert!(matches!(
            roi_from_track(&constant_track(3.0, 3.0, 2), (40, 40), PixelSpacing::isotropic(1.0), DEFAULT_ROI_MM),
            Err(Error::RoiLargerThanImage { .. })
        ));
    }

    #[test]
    fn crop_full_frame_and_window() {
        let frames: Vec<Frame> = (0..3).map(|k| Frame::from_fn(20, 20, |x, y| (k * 1000 + y * 20 + x) as f64)).collect();
        let s = CineSeries::new(frames, PixelSpacing::isotropic(0.7), vec![0.0, 30.0, 60.0], 100.0).unwrap();
        let full = Roi { x: 0, y: 0, height: 20, width: 20 };
        assert_eq!(crop_series(&s, &full).unwrap(), s);
        let c = crop_series(&s, &Roi { x: 5, y: 5, height: 10, width: 10 }).unwrap();
        assert_eq!((c.height(), c.width()), (10, 10));
        for k in 0..3 {
            for y in 0..10 {
                for x in 0..10 {
                    assert_eq!(c.frame(k).get(x, y), s.frame(k).get(x + 5, y + 5));
                }
            }
        }
        assert_eq!(c.trigger_times(), s.trigger_times());
        assert_eq!(c.pixel_spacing(), s.pixel_spacing());
        assert!(matches!(
            crop_series(&s, &Roi { x: 15, y: 0, height: 10, width: 10 }),
            Err(Error::RoiOutOfBounds { .. })
        ));
    }
}
