//! Synthetic CINE series with a bright moving target and known rest plateaus.
//!
//! The target follows a closed-form trajectory: inside each configured rest
//! interval the displacement is exactly constant, and between plateaus it
//! follows a cosine ramp `(1 - cos(pi u)) / 2`. Plateaus alternate between
//! the two ends of the motion range, so every gap between them carries
//! motion. A smooth random texture moves rigidly with the target so that a
//! dense registration sees the motion across the whole neighbourhood, not
//! only on the disk edge.
//!
//! An optional distractor makes the tissue outside a ring around the target
//! move on its own circular path for the entire cycle, carrying a second
//! bright structure. It is the case Gaussian weighting is meant to suppress.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CineSeries, Frame, LandmarkTrack, PixelPoint, PixelSpacing, SeriesDims};

const TEXTURE_MODES: usize = 32;

/// Off-target structure with its own motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistractorConfig {
    /// Tissue closer than this to the target rest position follows the target.
    pub inner_radius_mm: f64,
    /// Tissue farther than this follows the distractor.
    pub outer_radius_mm: f64,
    /// Radius of the circular distractor path. Zero keeps it static.
    pub amplitude_mm: f64,
    /// Full circular revolutions per RR interval.
    pub cycles_per_rr: u32,
    /// Distance of the bright distractor disk from the target rest position.
    pub structure_offset_mm: f64,
    pub structure_radius_mm: f64,
    pub structure_level: f64,
}

impl Default for DistractorConfig {
    fn default() -> Self {
        Self {
            inner_radius_mm: 9.0,
            outer_radius_mm: 15.0,
            amplitude_mm: 3.0,
            cycles_per_rr: 2,
            structure_offset_mm: 19.5,
            structure_radius_mm: 4.5,
            structure_level: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomConfig {
    pub dims: SeriesDims,
    pub pixel_spacing: PixelSpacing,
    pub rr_interval_ms: f64,
    pub target_radius_mm: f64,
    /// Peak-to-peak target excursion.
    pub motion_amplitude_mm: f64,
    /// Motion direction, counter-clockwise from the +x (column) axis.
    pub motion_direction_deg: f64,
    /// Closed intervals `[start, end]` in ms where the target is at rest.
    pub rest_intervals_ms: Vec<(f64, f64)>,
    pub noise_sigma: f64,
    pub background_level: f64,
    pub target_level: f64,
    /// Standard deviation of the moving background texture.
    pub texture_amplitude: f64,
    /// Characteristic length of the texture.
    pub texture_scale_mm: f64,
    /// Width of the anti-aliased disk boundary.
    pub edge_width_px: f64,
    pub distractor: Option<DistractorConfig>,
    pub seed: u64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            dims: SeriesDims::new(25, 96, 96),
            pixel_spacing: PixelSpacing::isotropic(1.5),
            rr_interval_ms: 1000.0,
            target_radius_mm: 4.5,
            motion_amplitude_mm: 8.0,
            motion_direction_deg: 30.0,
            rest_intervals_ms: vec![(250.0, 350.0), (600.0, 800.0)],
            noise_sigma: 0.0,
            background_level: 0.3,
            target_level: 1.0,
            texture_amplitude: 0.25,
            texture_scale_mm: 4.0,
            edge_width_px: 1.0,
            distractor: None,
            seed: 0,
        }
    }
}

/// Closed-form ground truth of a phantom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomTruth {
    /// Target center per frame.
    pub track: LandmarkTrack,
    /// Per transition `k -> k+1`: true when the target does not move.
    pub resting_frames: Vec<bool>,
    pub rest_intervals_ms: Vec<(f64, f64)>,
    /// Target displacement per transition.
    pub displacement_mm: Vec<f64>,
}

/// One generated cohort member.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomCase {
    pub config: PhantomConfig,
    pub series: CineSeries,
    pub truth: PhantomTruth,
}

impl PhantomConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.dims.frames < 2 || self.dims.height < 8 || self.dims.width < 8 {
            return bad("phantom needs at least 2 frames of 8x8 pixels");
        }
        if !(self.pixel_spacing.row > 0.0 && self.pixel_spacing.col > 0.0) {
            return bad("pixel spacing must be positive");
        }
        if !(self.rr_interval_ms > 0.0 && self.rr_interval_ms.is_finite()) {
            return bad("rr interval must be positive");
        }
        if !(self.target_radius_mm > 0.0) {
            return bad("target radius must be positive");
        }
        if !(self.motion_amplitude_mm >= 0.0) {
            return bad("motion amplitude must be non-negative");
        }
        if !(self.noise_sigma >= 0.0) || !(self.edge_width_px > 0.0) || !(self.texture_scale_mm > 0.0) {
            return bad("noise sigma, edge width and texture scale must be valid");
        }
        let mut iv = self.rest_intervals_ms.clone();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(s, e) in &iv {
            if !(s >= 0.0 && e > s && e < self.rr_interval_ms) {
                return bad("rest intervals must satisfy 0 <= start < end < rr");
            }
        }
        if iv.windows(2).any(|w| w[1].0 <= w[0].1) {
            return bad("rest intervals must be disjoint");
        }
        if let Some(d) = &self.distractor {
            if !(d.outer_radius_mm > d.inner_radius_mm && d.inner_radius_mm >= 0.0) || !(d.amplitude_mm >= 0.0) {
                return bad("distractor radii must satisfy 0 <= inner < outer");
            }
        }
        Ok(())
    }

    /// Uniform trigger times `k * rr / T`.
    pub fn trigger_times(&self) -> Vec<f64> {
        let t = self.dims.frames;
        (0..t).map(|k| k as f64 * self.rr_interval_ms / t as f64).collect()
    }

    fn sorted_plateaus(&self) -> Vec<(f64, f64)> {
        let mut iv = self.rest_intervals_ms.clone();
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        iv
    }

    /// Normalized displacement along the motion direction, in `[0, 1]`.
    ///
    /// Plateau `i` sits at level 1 for even `i` and 0 for odd `i`.
    pub fn motion_profile(&self, t_ms: f64) -> f64 {
        let rr = self.rr_interval_ms;
        let plateaus = self.sorted_plateaus();
        let t = t_ms.rem_euclid(rr);
        if plateaus.is_empty() {
            return 0.5 * (1.0 - (2.0 * PI * t / rr).cos());
        }
        let level = |i: usize| if i.is_multiple_of(2) { 1.0 } else { 0.0 };
        for (i, &(s, e)) in plateaus.iter().enumerate() {
            if t >= s && t <= e {
                return level(i);
            }
        }
        let n = plateaus.len();
        // gap i runs from the end of plateau i to the start of plateau i+1 (cyclic)
        for i in 0..n {
            let start = plateaus[i].1;
            let (end, next) = if i + 1 < n {
                (plateaus[i + 1].0, i + 1)
            } else {
                (plateaus[0].0 + rr, 0)
            };
            let tt = if t < start { t + rr } else { t };
            if tt > start && tt < end {
                let u = (tt - start) / (end - start);
                let (a, b) = (level(i), level(next));
                return if a != b {
                    a + (b - a) * 0.5 * (1.0 - (PI * u).cos())
                } else {
                    a + (1.0 - 2.0 * a) * 0.5 * (1.0 - (2.0 * PI * u).cos())
                };
            }
        }
        unreachable!("time {t} is neither in a plateau nor in a gap")
    }

    /// Center of the image, where the midpoint of the target excursion sits.
    pub fn rest_center(&self) -> PixelPoint {
        PixelPoint::new(
            (self.dims.width - 1) as f64 / 2.0,
            (self.dims.height - 1) as f64 / 2.0,
        )
    }

    /// Target offset from [`rest_center`](Self::rest_center) at a time.
    fn target_offset_px(&self, t_ms: f64) -> (f64, f64) {
        let theta = self.motion_direction_deg.to_radians();
        let s = self.motion_profile(t_ms) - 0.5;
        let a = self.motion_amplitude_mm;
        (
            s * a * theta.cos() / self.pixel_spacing.col,
            s * a * theta.sin() / self.pixel_spacing.row,
        )
    }

    /// Closed-form target center at a time.
    pub fn target_center(&self, t_ms: f64) -> PixelPoint {
        let c = self.rest_center();
        let (dx, dy) = self.target_offset_px(t_ms);
        PixelPoint::new(c.x + dx, c.y + dy)
    }

    fn distractor_offset_px(&self, d: &DistractorConfig, t_ms: f64) -> (f64, f64) {
        let phase = 2.0 * PI * d.cycles_per_rr as f64 * t_ms / self.rr_interval_ms;
        (
            d.amplitude_mm * (phase.cos() - 1.0) / self.pixel_spacing.col,
            d.amplitude_mm * phase.sin() / self.pixel_spacing.row,
        )
    }

    /// Ground truth computed from the trajectory alone.
    pub fn truth(&self) -> PhantomTruth {
        let times = self.trigger_times();
        let points: Vec<PixelPoint> = times.iter().map(|&t| self.target_center(t)).collect();
        let displacement_mm: Vec<f64> = points
            .windows(2)
            .map(|p| self.pixel_spacing.physical_length(p[1].x - p[0].x, p[1].y - p[0].y))
            .collect();
        PhantomTruth {
            resting_frames: displacement_mm.iter().map(|&d| d < f64::EPSILON).collect(),
            displacement_mm,
            track: LandmarkTrack::new(points),
            rest_intervals_ms: self.sorted_plateaus(),
        }
    }
}

/// Random plane-wave texture with unit variance.
struct Texture {
    modes: Vec<(f64, f64, f64)>,
    amplitude: f64,
}

impl Texture {
    fn new(cfg: &PhantomConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(1);
        let scale_px = cfg.texture_scale_mm / cfg.pixel_spacing.col.min(cfg.pixel_spacing.row);
        let modes = (0..TEXTURE_MODES)
            .map(|_| {
                let wavelength = scale_px * rng.random_range(2.0..5.0);
                let k = 2.0 * PI / wavelength;
                let dir = rng.random_range(0.0..2.0 * PI);
                let phase = rng.random_range(0.0..2.0 * PI);
                (k * dir.cos(), k * dir.sin(), phase)
            })
            .collect();
        Self {
            modes,
            amplitude: cfg.texture_amplitude * (2.0 / TEXTURE_MODES as f64).sqrt(),
        }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * self.modes.iter().map(|&(kx, ky, ph)| (kx * x + ky * y + ph).cos()).sum::<f64>()
    }
}

fn smoothstep(v: f64) -> f64 {
    let v = v.clamp(0.0, 1.0);
    v * v * (3.0 - 2.0 * v)
}

/// Fractional coverage of a disk at physical distance `d_mm` from its center.
fn disk_coverage(d_mm: f64, radius_mm: f64, edge_mm: f64) -> f64 {
    ((radius_mm - d_mm) / edge_mm + 0.5).clamp(0.0, 1.0)
}

/// Render one phantom series and its ground truth.
pub fn generate_phantom(cfg: &PhantomConfig) -> Result<(CineSeries, PhantomTruth)> {
    cfg.validate()?;
    let truth = cfg.truth();
    let (h, w) = (cfg.dims.height, cfg.dims.width);
    let sp = cfg.pixel_spacing;
    let rx = cfg.target_radius_mm / sp.col;
    let ry = cfg.target_radius_mm / sp.row;
    for (frame, p) in truth.track.points.iter().enumerate() {
        if p.x - rx < 0.0 || p.y - ry < 0.0 || p.x + rx > (w - 1) as f64 || p.y + ry > (h - 1) as f64 {
            return Err(Error::TrajectoryOutOfBounds {
                frame,
                center: *p,
                radius_px: rx.max(ry),
            });
        }
    }

    let texture = Texture::new(cfg);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    noise_rng.set_stream(2);
    let edge_mm = cfg.edge_width_px * sp.col.min(sp.row);
    let center = cfg.rest_center();
    let theta = cfg.motion_direction_deg.to_radians();

    // Weight of the distractor motion per pixel, static over time.
    let distractor_weight: Option<Vec<f64>> = cfg.distractor.as_ref().map(|d| {
        (0..h * w)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                let r = sp.physical_length(x - center.x, y - center.y);
                smoothstep((r - d.inner_radius_mm) / (d.outer_radius_mm - d.inner_radius_mm))
            })
            .collect()
    });
    let structure_home = cfg.distractor.as_ref().map(|d| {
        PixelPoint::new(
            center.x - d.structure_offset_mm * theta.cos() / sp.col,
            center.y - d.structure_offset_mm * theta.sin() / sp.row,
        )
    });

    let times = cfg.trigger_times();
    let mut frames = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let target = truth.track.points[k];
        let (tx, ty) = cfg.target_offset_px(t);
        let doff = cfg.distractor.as_ref().map(|d| cfg.distractor_offset_px(d, t));
        let mut data = Vec::with_capacity(h * w);
        for y in 0..h {
            for x in 0..w {
                let (xf, yf) = (x as f64, y as f64);
                let (mut ux, mut uy) = (tx, ty);
                if let (Some(wts), Some((dx, dy))) = (&distractor_weight, doff) {
                    let m = wts[y * w + x];
                    ux = (1.0 - m) * tx + m * dx;
                    uy = (1.0 - m) * ty + m * dy;
                }
                let mut v = cfg.background_level + texture.eval(xf - ux, yf - uy);
                let d = sp.physical_length(xf - target.x, yf - target.y);
                v += (cfg.target_level - cfg.background_level) * disk_coverage(d, cfg.target_radius_mm, edge_mm);
                if let (Some(dc), Some(home), Some((dx, dy))) = (&cfg.distractor, structure_home, doff) {
                    let ds = sp.physical_length(xf - home.x - dx, yf - home.y - dy);
                    v += (dc.structure_level - cfg.background_level) * disk_coverage(ds, dc.structure_radius_mm, edge_mm);
                }
                if cfg.noise_sigma > 0.0 {
                    let n: f64 = noise_rng.sample(StandardNormal);
                    v += cfg.noise_sigma * n;
                }
                data.push(v);
            }
        }
        frames.push(Frame::new(h, w, data)?);
    }
    let series = CineSeries::new(frames, sp, times, cfg.rr_interval_ms)?;
    Ok((series, truth))
}

/// Parameter ranges sampled per cohort member. Plateau placements are
/// fractions of the RR interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortRanges {
    pub rr_interval_ms: (f64, f64),
    pub frames: (usize, usize),
    pub motion_amplitude_mm: (f64, f64),
    pub systolic_start: (f64, f64),
    pub systolic_duration: (f64, f64),
    pub diastolic_start: (f64, f64),
    pub diastolic_duration: (f64, f64),
}

impl Default for CohortRanges {
    fn default() -> Self {
        Self {
            // 35 to 97 bpm
            rr_interval_ms: (620.0, 1710.0),
            frames: (25, 32),
            motion_amplitude_mm: (7.0, 10.0),
            systolic_start: (0.24, 0.30),
            systolic_duration: (0.10, 0.14),
            diastolic_start: (0.60, 0.65),
            diastolic_duration: (0.13, 0.19),
        }
    }
}

/// Deterministic configuration of cohort member `index`.
pub fn cohort_member_config(base: &PhantomConfig, ranges: &CohortRanges, seed: u64, index: usize) -> PhantomConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut draw = |r: (f64, f64)| if r.1 > r.0 { rng.random_range(r.0..=r.1) } else { r.0 };
    let rr = draw(ranges.rr_interval_ms);
    let amplitude = draw(ranges.motion_amplitude_mm);
    let direction = draw((0.0, 360.0));
    let sys_start = draw(ranges.systolic_start) * rr;
    let sys_end = sys_start + draw(ranges.systolic_duration) * rr;
    let dia_start = draw(ranges.diastolic_start) * rr;
    let dia_end = dia_start + draw(ranges.diastolic_duration) * rr;
    let frames = if ranges.frames.1 > ranges.frames.0 {
        rng.random_range(ranges.frames.0..=ranges.frames.1)
    } else {
        ranges.frames.0
    };
    let member_seed = rng.random::<u64>();
    PhantomConfig {
        dims: SeriesDims::new(frames, base.dims.height, base.dims.width),
        rr_interval_ms: rr,
        motion_amplitude_mm: amplitude,
        motion_direction_deg: direction,
        rest_intervals_ms: vec![(sys_start, sys_end), (dia_start, dia_end)],
        seed: member_seed,
        ..base.clone()
    }
}

/// Generate `n` phantoms whose parameters are drawn from `seed`.
pub fn generate_cohort(base: &PhantomConfig, ranges: &CohortRanges, n: usize, seed: u64) -> Result<Vec<PhantomCase>> {
    if n == 0 {
        return Err(Error::InvalidParams("cohort size must be at least 1".into()));
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let config = cohort_member_config(base, ranges, seed, i);
            let (series, truth) = generate_phantom(&config)?;
            Ok(PhantomCase { config, series, truth })
        })
        .collect()
}
