use restphase_core::cropping::{crop_series, roi_from_track, DEFAULT_ROI_MM};
use restphase_core::localization::{ncc_template_track, TemplateTrackerParams};
use restphase_core::model::min_max_normalize;
use restphase_core::phantom::{generate_phantom, PhantomConfig};

#[test]
fn cropped_phantom_contains_target_in_every_frame() {
    let cfg = PhantomConfig::default();
    let (series, truth) = generate_phantom(&cfg).unwrap();
    let roi = roi_from_track(&truth.track, (series.height(), series.width()), series.pixel_spacing(), DEFAULT_ROI_MM).unwrap();
    let cropped = crop_series(&series, &roi).unwrap();
    let r = cfg.target_radius_mm / cfg.pixel_spacing.col;
    for p in &truth.track.translated(-(roi.x as f64), -(roi.y as f64)).points {
        assert!(p.x - r >= 0.0 && p.y - r >= 0.0, "{p:?}");
        assert!(p.x + r <= (cropped.width() - 1) as f64 && p.y + r <= (cropped.height() - 1) as f64, "{p:?}");
    }
}

#[test]
fn localizing_commutes_with_cropping() {
    let (series, truth) = generate_phantom(&PhantomConfig::default()).unwrap();
    let (series, _) = min_max_normalize(&series);
    let params = TemplateTrackerParams::default();
    let full = ncc_template_track(&series, truth.track.points[0], &params).unwrap();
    let roi = roi_from_track(&full, (series.height(), series.width()), series.pixel_spacing(), DEFAULT_ROI_MM).unwrap();
    let cropped = crop_series(&series, &roi).unwrap();
    let (ox, oy) = (roi.x as f64, roi.y as f64);
    let start = truth.track.translated(-ox, -oy).points[0];
    let inside = ncc_template_track(&cropped, start, &params).unwrap();
    for (a, b) in inside.points.iter().zip(&full.translated(-ox, -oy).points) {
        assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9, "{a:?} vs {b:?}");
    }
}
