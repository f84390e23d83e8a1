//! End-to-end detection: normalize, localize, crop, register, quantify,
//! classify.

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::classification::{classify_rp, RestingPhaseSet, RpParams};
use crate::cropping::{crop_series, roi_from_track, DEFAULT_ROI_MM};
use crate::error::Error;
use crate::localization::{ncc_template_track, propagation_localizer, TemplateTrackerParams};
use crate::model::{
    min_max_normalize, resample_series, CineSeries, LandmarkTrack, NormalizationReport, PixelPoint, Roi, SeriesDims,
};
use crate::motion::{motion_curve, MotionCurve, MotionParams};
use crate::registration::{register_series, DeformationField, RegistrationParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Preprocessing,
    Localization,
    Cropping,
    Registration,
    Motion,
    Classification,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Preprocessing => "preprocessing",
            Stage::Localization => "localization",
            Stage::Cropping => "cropping",
            Stage::Registration => "registration",
            Stage::Motion => "motion",
            Stage::Classification => "classification",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T, Error> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalizerConfig {
    Ncc(TemplateTrackerParams),
    Propagation(RegistrationParams),
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        LocalizerConfig::Ncc(TemplateTrackerParams::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub localizer: LocalizerConfig,
    /// Grid the localizer runs on; `None` keeps the acquisition grid.
    pub localizer_grid: Option<SeriesDims>,
    pub roi_size_mm: (f64, f64),
    pub registration: RegistrationParams,
    pub motion: MotionParams,
    pub rp: RpParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            localizer: LocalizerConfig::default(),
            localizer_grid: None,
            roi_size_mm: DEFAULT_ROI_MM,
            registration: RegistrationParams::default(),
            motion: MotionParams::default(),
            rp: RpParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub stage: Stage,
    pub elapsed: Duration,
}

/// Everything up to and including registration.
#[derive(Debug, Clone, PartialEq)]
pub struct Registered {
    pub normalization: NormalizationReport,
    /// Track in full-frame coordinates.
    pub track: LandmarkTrack,
    pub roi: Roi,
    /// Track in ROI coordinates.
    pub roi_track: LandmarkTrack,
    pub fields: Vec<DeformationField>,
    pub frame_times: Vec<f64>,
    pub rr_interval_ms: f64,
    pub timings: Vec<StageTiming>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub registered: Registered,
    pub curve: MotionCurve,
    pub rest: RestingPhaseSet,
}

impl PipelineOutput {
    pub fn timings(&self) -> &[StageTiming] {
        &self.registered.timings
    }
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: Stage, f: impl FnOnce() -> Result<T, Error>) -> Result<T, PipelineError> {
    let t0 = Instant::now();
    let out = f().at(stage);
    timings.push(StageTiming {
        stage,
        elapsed: t0.elapsed(),
    });
    out
}

fn localize(series: &CineSeries, p0: PixelPoint, config: &PipelineConfig) -> Result<LandmarkTrack, Error> {
    let run = |s: &CineSeries, p: PixelPoint| match &config.localizer {
        LocalizerConfig::Ncc(params) => ncc_template_track(s, p, params),
        LocalizerConfig::Propagation(params) => propagation_localizer(s, p, params),
    };
    match config.localizer_grid {
        None => run(series, p0),
        Some(grid) => {
            let (resampled, map) = resample_series(series, grid)?;
            let track = run(&resampled, map.to_resampled(p0))?;
            // back to the acquisition grid: spatially per point, temporally
            // by linear interpolation between resampled frames
            let pts: Vec<PixelPoint> = track.points.iter().map(|&p| map.to_original(p)).collect();
            let n = series.len();
            let last = pts.len() - 1;
            let points = (0..n)
                .map(|k| {
                    let u = if n > 1 { k as f64 * last as f64 / (n - 1) as f64 } else { 0.0 };
                    let i = (u.floor() as usize).min(last);
                    let j = (i + 1).min(last);
                    let f = u - i as f64;
                    PixelPoint::new(pts[i].x + f * (pts[j].x - pts[i].x), pts[i].y + f * (pts[j].y - pts[i].y))
                })
                .collect();
            Ok(LandmarkTrack::new(points))
        }
    }
}

/// Run the stages that produce deformation fields.
pub fn register_stages(series: &CineSeries, p0: Option<PixelPoint>, config: &PipelineConfig) -> Result<Registered, PipelineError> {
    let mut timings = Vec::new();
    let (normalized, normalization) = timed(&mut timings, Stage::Preprocessing, || {
        config.registration.validate()?;
        config.motion.validate()?;
        config.rp.validate(series.rr_interval())?;
        Ok(min_max_normalize(series))
    })?;
    let track = timed(&mut timings, Stage::Localization, || {
        let p0 = p0.ok_or_else(|| Error::InvalidParams("no landmark annotation for frame 0".into()))?;
        localize(&normalized, p0, config)
    })?;
    let (roi, cropped) = timed(&mut timings, Stage::Cropping, || {
        let roi = roi_from_track(&track, (series.height(), series.width()), series.pixel_spacing(), config.roi_size_mm)?;
        Ok((roi, crop_series(&normalized, &roi)?))
    })?;
    let fields = timed(&mut timings, Stage::Registration, || register_series(&cropped, &config.registration))?;
    let roi_track = track.translated(-(roi.x as f64), -(roi.y as f64));
    Ok(Registered {
        normalization,
        track,
        roi,
        roi_track,
        fields,
        frame_times: series.trigger_times().to_vec(),
        rr_interval_ms: series.rr_interval(),
        timings,
    })
}

/// Quantify motion and classify, reusing registered fields.
pub fn finish(mut registered: Registered, motion: &MotionParams, rp: &RpParams) -> Result<PipelineOutput, PipelineError> {
    let mut timings = std::mem::take(&mut registered.timings);
    let curve = timed(&mut timings, Stage::Motion, || {
        motion_curve(&registered.fields, &registered.roi_track, &registered.frame_times, motion)
    })?;
    let rest = timed(&mut timings, Stage::Classification, || classify_rp(&curve, registered.rr_interval_ms, rp))?;
    registered.timings = timings;
    Ok(PipelineOutput { registered, curve, rest })
}

pub fn run_pipeline(series: &CineSeries, p0: Option<PixelPoint>, config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    let registered = register_stages(series, p0, config)?;
    finish(registered, &config.motion, &config.rp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{generate_phantom, PhantomConfig};

    #[test]
    fn missing_annotation_fails_in_localization() {
        let (series, _) = generate_phantom(&PhantomConfig::default()).unwrap();
        let err = run_pipeline(&series, None, &PipelineConfig::default()).unwrap_err();
        assert_eq!(err.stage, Stage::Localization);
        assert!(err.to_string().starts_with("localization stage failed"));
    }

    #[test]
    fn bad_params_fail_in_preprocessing() {
        let (series, truth) = generate_phantom(&PhantomConfig::default()).unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.rp.tau = -1.0;
        let err = run_pipeline(&series, Some(truth.track.points[0]), &cfg).unwrap_err();
        assert_eq!(err.stage, Stage::Preprocessing);
    }

    #[test]
    fn static_phantom_rests_across_the_window() {
        let cfg = PhantomConfig {
            motion_amplitude_mm: 0.0,
            ..PhantomConfig::default()
        };
        let (series, truth) = generate_phantom(&cfg).unwrap();
        let out = run_pipeline(&series, Some(truth.track.points[0]), &PipelineConfig::default()).unwrap();
        assert_eq!(out.rest.intervals.len(), 1);
        assert_eq!(out.rest.rp_mask, out.rest.valid_transitions());
        assert_eq!(out.timings().len(), 6);
        assert_eq!(out.registered.roi_track.points[0].x, truth.track.points[0].x - out.registered.roi.x as f64);
    }
}
