//! Per-transition motion values from deformation fields and tracks.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LandmarkTrack, PixelPoint, PixelSpacing};
use crate::registration::DeformationField;
use crate::stats::percentile_of_sorted;

pub use crate::stats::percentile;

pub const DEFAULT_SIGMA_PX: f64 = 12.0;

/// How a field (or a track step) is reduced to one value per transition.
///
/// Text form: `dist`, `pct(n)`, `mean`, `wpct(n)`, `wmean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MotionVariant {
    /// Distance between consecutive track points.
    Dist,
    /// Percentile of field magnitudes.
    Pct(f64),
    Mean,
    /// Percentile of Gaussian-weighted field magnitudes.
    Wpct(f64),
    Wmean,
}

impl MotionVariant {
    /// The primary variant: weighted median.
    pub const PRIMARY: MotionVariant = MotionVariant::Wpct(50.0);

    pub fn validate(&self) -> Result<()> {
        match *self {
            MotionVariant::Pct(n) | MotionVariant::Wpct(n) if !(0.0..=100.0).contains(&n) => {
                Err(Error::BadVariant(format!("percentile {n} outside [0, 100]")))
            }
            _ => Ok(()),
        }
    }

    fn weighted(&self) -> bool {
        matches!(self, MotionVariant::Wpct(_) | MotionVariant::Wmean)
    }

    /// The grid of the variant comparison: dist, pct(10..100), mean,
    /// wpct(10..100), wmean.
    pub fn comparison_grid() -> Vec<MotionVariant> {
        let grid: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
        let mut out = vec![MotionVariant::Dist];
        out.extend(grid.iter().map(|&n| MotionVariant::Pct(n)));
        out.push(MotionVariant::Mean);
        out.extend(grid.iter().map(|&n| MotionVariant::Wpct(n)));
        out.push(MotionVariant::Wmean);
        out
    }
}

impl fmt::Display for MotionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MotionVariant::Dist => write!(f, "dist"),
            MotionVariant::Pct(n) => write!(f, "pct({n})"),
            MotionVariant::Mean => write!(f, "mean"),
            MotionVariant::Wpct(n) => write!(f, "wpct({n})"),
            MotionVariant::Wmean => write!(f, "wmean"),
        }
    }
}

impl FromStr for MotionVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::BadVariant(s.to_string());
        let v = match s {
            "dist" => MotionVariant::Dist,
            "mean" => MotionVariant::Mean,
            "wmean" => MotionVariant::Wmean,
            _ => {
                let (name, rest) = s.split_once('(').ok_or_else(bad)?;
                let n: f64 = rest.strip_suffix(')').ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
                match name.trim() {
                    "pct" => MotionVariant::Pct(n),
                    "wpct" => MotionVariant::Wpct(n),
                    _ => return Err(bad()),
                }
            }
        };
        v.validate()?;
        Ok(v)
    }
}

impl TryFrom<String> for MotionVariant {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MotionVariant> for String {
    fn from(v: MotionVariant) -> String {
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionParams {
    pub variant: MotionVariant,
    /// Gaussian width in pixels.
    pub sigma: f64,
    /// Aggregate `|d|^2` instead of `|d|`.
    pub squared: bool,
}

impl Default for MotionParams {
    fn default() -> Self {
        Self {
            variant: MotionVariant::PRIMARY,
            sigma: DEFAULT_SIGMA_PX,
            squared: false,
        }
    }
}

impl MotionParams {
    pub fn with_variant(variant: MotionVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.variant.validate()?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// `exp(-|x - center|^2 / sigma^2)` at every pixel center.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWeightMap {
    pub height: usize,
    pub width: usize,
    pub center: PixelPoint,
    pub sigma: f64,
    pub weights: Vec<f64>,
}

impl GaussianWeightMap {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.weights[y * self.width + x]
    }
}

pub fn gaussian_weights(center: PixelPoint, dims: (usize, usize), sigma: f64) -> Result<GaussianWeightMap> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
    }
    let (height, width) = dims;
    let s2 = sigma * sigma;
    let mut weights = Vec::with_capacity(height * width);
    for y in 0..height {
        let dy = y as f64 - center.y;
        for x in 0..width {
            let dx = x as f64 - center.x;
            weights.push((-(dx * dx + dy * dy) / s2).exp());
        }
    }
    Ok(GaussianWeightMap {
        height,
        width,
        center,
        sigma,
        weights,
    })
}

/// One motion value per frame transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionCurve {
    /// `values[k]` describes the transition from frame `k` to `k + 1`.
    pub values: Vec<f64>,
    /// Trigger times of all frames, one more than `values`.
    pub frame_times: Vec<f64>,
    pub params: MotionParams,
}

impl MotionCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn variant(&self) -> MotionVariant {
        self.params.variant
    }

    /// Trigger time of the first frame of each transition.
    pub fn transition_times(&self) -> &[f64] {
        &self.frame_times[..self.values.len()]
    }

    /// Values converted from pixels to mm, assuming isotropic spacing
    /// (the geometric mean of row and column spacing is used).
    pub fn in_millimetres(&self, spacing: PixelSpacing) -> Vec<f64> {
        let s = (spacing.row * spacing.col).sqrt();
        let s = if self.params.squared { s * s } else { s };
        self.values.iter().map(|v| v * s).collect()
    }
}

fn reduce(mut values: Vec<f64>, variant: MotionVariant) -> f64 {
    match variant {
        MotionVariant::Mean | MotionVariant::Wmean => values.iter().sum::<f64>() / values.len() as f64,
        MotionVariant::Pct(n) | MotionVariant::Wpct(n) => {
            values.sort_unstable_by(f64::total_cmp);
            percentile_of_sorted(&values, n)
        }
        MotionVariant::Dist => unreachable!("dist does not aggregate a field"),
    }
}

/// Motion value of a single transition.
pub fn transition_motion(
    field: &DeformationField,
    p_t: PixelPoint,
    p_next: PixelPoint,
    params: &MotionParams,
) -> Result<f64> {
    let power = |m: f64| if params.squared { m * m } else { m };
    if params.variant == MotionVariant::Dist {
        return Ok(power(p_t.distance(&p_next)));
    }
    let mut mags: Vec<f64> = field.magnitudes().into_iter().map(power).collect();
    if mags.is_empty() {
        return Err(Error::EmptyInput);
    }
    if params.variant.weighted() {
        let g = gaussian_weights(p_t.midpoint(&p_next), field.dims(), params.sigma)?;
        mags.iter_mut().zip(&g.weights).for_each(|(m, w)| *m *= w);
    }
    Ok(reduce(mags, params.variant))
}

/// Motion curve of a series. `track` must be in the fields' coordinate
/// frame (ROI coordinates when the fields come from a cropped series).
pub fn motion_curve(
    fields: &[DeformationField],
    track: &LandmarkTrack,
    frame_times: &[f64],
    params: &MotionParams,
) -> Result<MotionCurve> {
    params.validate()?;
    if fields.is_empty() {
        return Err(Error::EmptyInput);
    }
    if track.len() != fields.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: fields.len() + 1,
            actual: track.len(),
        });
    }
    if frame_times.len() != track.len() {
        return Err(Error::LengthMismatch {
            expected: track.len(),
            actual: frame_times.len(),
        });
    }
    let values = fields
        .par_iter()
        .enumerate()
        .map(|(k, f)| transition_motion(f, track.points[k], track.points[k + 1], params))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MotionCurve {
        values,
        frame_times: frame_times.to_vec(),
        params: *params,
    })
}
