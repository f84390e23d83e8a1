//! On-disk artifacts. Every JSON file carries a `schema_version`; frames
//! and fields are little-endian `f32` blobs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use restphase_core::classification::{RestingPhaseSet, RpInterval};
use restphase_core::model::{CineSeries, Frame, LandmarkTrack, PixelPoint, PixelSpacing, Roi, SeriesDims};
use restphase_core::motion::MotionCurve;
use restphase_core::registration::DeformationField;

pub const SCHEMA_VERSION: u32 = 1;

pub const SERIES_JSON: &str = "series.json";
pub const FRAMES_BIN: &str = "frames.bin";
pub const TRUTH_JSON: &str = "truth.json";
pub const TRUTH_RP_JSON: &str = "truth_rp.json";
pub const ANNOTATION_JSON: &str = "annotation.json";
pub const RP_JSON: &str = "rp.json";

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_version(found: u32, path: &Path) -> Result<()> {
    ensure!(
        found == SCHEMA_VERSION,
        "{}: schema_version {found} is not supported (expected {SCHEMA_VERSION})",
        path.display()
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesHeader {
    pub schema_version: u32,
    pub dims: SeriesDims,
    pub pixel_spacing: PixelSpacing,
    pub trigger_times: Vec<f64>,
    pub rr_interval: f64,
    pub frames_file: String,
}

pub fn write_series(dir: &Path, series: &CineSeries) -> Result<()> {
    let mut bytes = Vec::with_capacity(series.len() * series.height() * series.width() * 4);
    for f in series.frames() {
        for &v in f.data() {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    write_atomic(&dir.join(FRAMES_BIN), &bytes)?;
    write_json(
        &dir.join(SERIES_JSON),
        &SeriesHeader {
            schema_version: SCHEMA_VERSION,
            dims: series.dims(),
            pixel_spacing: series.pixel_spacing(),
            trigger_times: series.trigger_times().to_vec(),
            rr_interval: series.rr_interval(),
            frames_file: FRAMES_BIN.to_string(),
        },
    )
}

pub fn read_series(dir: &Path) -> Result<CineSeries> {
    let header_path = dir.join(SERIES_JSON);
    let h: SeriesHeader = read_json(&header_path)?;
    check_version(h.schema_version, &header_path)?;
    let bin = dir.join(&h.frames_file);
    let bytes = fs::read(&bin).with_context(|| format!("reading {}", bin.display()))?;
    let n = h.dims.height * h.dims.width;
    ensure!(
        bytes.len() == 4 * n * h.dims.frames,
        "{}: expected {} bytes, found {}",
        bin.display(),
        4 * n * h.dims.frames,
        bytes.len()
    );
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let frames = values
        .chunks_exact(n.max(1))
        .map(|c| Frame::new(h.dims.height, h.dims.width, c.to_vec()))
        .collect::<restphase_core::Result<Vec<_>>>()?;
    Ok(CineSeries::new(frames, h.pixel_spacing, h.trigger_times, h.rr_interval)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub frame: usize,
    pub x: f64,
    pub y: f64,
}

impl Annotation {
    pub fn point(&self) -> PixelPoint {
        PixelPoint::new(self.x, self.y)
    }
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

pub fn read_annotation(path: &Path) -> Result<Annotation> {
    let a: Annotation = read_json(path)?;
    check_version(a.schema_version, path)?;
    if a.frame != 0 {
        bail!("{}: annotations must refer to frame 0, found frame {}", path.display(), a.frame);
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackFile {
    pub schema_version: u32,
    pub points: Vec<PixelPoint>,
}

impl TrackFile {
    pub fn new(track: &LandmarkTrack) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            points: track.points.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiFile {
    pub schema_version: u32,
    pub x: usize,
    pub y: usize,
    pub height: usize,
    pub width: usize,
}

impl RoiFile {
    pub fn new(roi: &Roi) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            x: roi.x,
            y: roi.y,
            height: roi.height,
            width: roi.width,
        }
    }
}

/// Resting-phase report; also used for reference annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpReport {
    pub schema_version: u32,
    pub intervals: Vec<RpInterval>,
    pub tau: f64,
    pub alpha: f64,
    pub omega: f64,
    pub dropped_short_intervals: usize,
    pub dropped: Vec<RpInterval>,
    pub rp_mask: Vec<bool>,
    pub frame_times: Vec<f64>,
    pub rr_interval: f64,
}

impl From<&RestingPhaseSet> for RpReport {
    fn from(rp: &RestingPhaseSet) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            intervals: rp.intervals.clone(),
            tau: rp.tau,
            alpha: rp.alpha_ms,
            omega: rp.omega_ms,
            dropped_short_intervals: rp.dropped_short_intervals(),
            dropped: rp.dropped.clone(),
            rp_mask: rp.rp_mask.clone(),
            frame_times: rp.frame_times.clone(),
            rr_interval: rp.rr_interval_ms,
        }
    }
}

impl RpReport {
    pub fn into_set(self) -> RestingPhaseSet {
        RestingPhaseSet {
            intervals: self.intervals,
            dropped: self.dropped,
            rp_mask: self.rp_mask,
            tau: self.tau,
            alpha_ms: self.alpha,
            omega_ms: self.omega,
            rr_interval_ms: self.rr_interval,
            frame_times: self.frame_times,
        }
    }
}

pub fn read_rp(path: &Path) -> Result<RestingPhaseSet> {
    let r: RpReport = read_json(path)?;
    check_version(r.schema_version, path)?;
    ensure!(
        r.frame_times.len() == r.rp_mask.len() + 1,
        "{}: frame_times must have one more entry than rp_mask",
        path.display()
    );
    Ok(r.into_set())
}

pub fn curve_csv(curve: &MotionCurve) -> String {
    let mut s = String::from("transition_index,trigger_time_ms,value,variant\n");
    let variant = curve.variant().to_string();
    for (k, (t, v)) in curve.transition_times().iter().zip(&curve.values).enumerate() {
        s.push_str(&format!("{k},{t},{v},\"{variant}\"\n"));
    }
    s
}

pub fn read_curve_csv(text: &str) -> Result<Vec<(usize, f64, f64, String)>> {
    let mut lines = text.lines();
    ensure!(
        lines.next() == Some("transition_index,trigger_time_ms,value,variant"),
        "unexpected curve header"
    );
    lines
        .map(|l| {
            let mut it = l.splitn(4, ',');
            let mut next = || it.next().context("short curve row");
            Ok((
                next()?.parse()?,
                next()?.parse()?,
                next()?.parse()?,
                next()?.trim_matches('"').to_string(),
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub schema_version: u32,
    pub height: usize,
    pub width: usize,
    pub frame_pair: (usize, usize),
    pub layout: String,
}

/// Field `k` as `pair_NNN.bin` (interleaved dx, dy) plus a JSON sidecar.
pub fn write_field(dir: &Path, field: &DeformationField) -> Result<PathBuf> {
    let stem = format!("pair_{:03}", field.frame_pair.0);
    let mut bytes = Vec::with_capacity(field.dx().len() * 8);
    for (x, y) in field.dx().iter().zip(field.dy()) {
        bytes.extend_from_slice(&(*x as f32).to_le_bytes());
        bytes.extend_from_slice(&(*y as f32).to_le_bytes());
    }
    let bin = dir.join(format!("{stem}.bin"));
    write_atomic(&bin, &bytes)?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &FieldSidecar {
            schema_version: SCHEMA_VERSION,
            height: field.height(),
            width: field.width(),
            frame_pair: field.frame_pair,
            layout: "row-major, interleaved (dx, dy), little-endian f32".into(),
        },
    )?;
    Ok(bin)
}

pub fn read_field(bin: &Path) -> Result<DeformationField> {
    let side_path = bin.with_extension("json");
    let side: FieldSidecar = read_json(&side_path)?;
    check_version(side.schema_version, &side_path)?;
    let bytes = fs::read(bin)?;
    ensure!(bytes.len() == 8 * side.height * side.width, "{}: wrong size", bin.display());
    let vals: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let dx = vals.iter().step_by(2).copied().collect();
    let dy = vals.iter().skip(1).step_by(2).copied().collect();
    Ok(DeformationField::from_components(side.height, side.width, dx, dy)?.with_pair(side.frame_pair))
}

/// Numbered member directories (`000`, `001`, ...) in name order.
pub fn member_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n.to_string_lossy().chars().all(|c| c.is_ascii_digit())))
        .collect();
    out.sort();
    Ok(out)
}

pub fn member_name(index: usize) -> String {
    format!("{index:03}")
}
