//! Threshold-based resting-phase detection on a motion curve.
//!
//! A transition `k -> k+1` is eligible when both of its frames lie in the
//! window `[alpha, rr - omega]`. Eligible transitions with a value strictly
//! below `tau` are resting. Maximal runs of resting transitions become
//! intervals from the first frame of the run to the frame after its last
//! transition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::MotionCurve;

/// Fraction of the RR interval below which an interval midpoint counts as
/// systolic.
pub const SYSTOLIC_BAND: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RpParams {
    pub tau: f64,
    pub alpha_ms: f64,
    pub omega_ms: f64,
    pub min_duration_ms: f64,
}

impl Default for RpParams {
    fn default() -> Self {
        Self {
            tau: 0.2,
            alpha_ms: 80.0,
            omega_ms: 80.0,
            min_duration_ms: 30.0,
        }
    }
}

impl RpParams {
    pub fn validate(&self, rr_interval_ms: f64) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParams(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.alpha_ms >= 0.0 && self.omega_ms >= 0.0 && self.min_duration_ms >= 0.0) {
            return Err(Error::InvalidParams("alpha, omega and min_duration must be non-negative".into()));
        }
        if self.alpha_ms + self.omega_ms >= rr_interval_ms {
            return Err(Error::InvalidWindow {
                alpha_ms: self.alpha_ms,
                omega_ms: self.omega_ms,
                rr_ms: rr_interval_ms,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RpLabel {
    Systolic,
    Diastolic,
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpInterval {
    pub label: RpLabel,
    pub start_ms: f64,
    pub end_ms: f64,
    pub start_frame: usize,
    pub end_frame: usize,
}

impl RpInterval {
    pub fn duration_ms(&self) -> f64 {
        self.end_ms - self.start_ms
    }

    pub fn midpoint_ms(&self) -> f64 {
        0.5 * (self.start_ms + self.end_ms)
    }

    pub fn overlap_ms(&self, other: &RpInterval) -> f64 {
        (self.end_ms.min(other.end_ms) - self.start_ms.max(other.start_ms)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestingPhaseSet {
    /// Reported intervals in time order.
    pub intervals: Vec<RpInterval>,
    /// Intervals removed for being shorter than the minimum duration.
    pub dropped: Vec<RpInterval>,
    /// Per transition: eligible and below threshold.
    pub rp_mask: Vec<bool>,
    pub tau: f64,
    pub alpha_ms: f64,
    pub omega_ms: f64,
    pub rr_interval_ms: f64,
    pub frame_times: Vec<f64>,
}

impl RestingPhaseSet {
    pub fn dropped_short_intervals(&self) -> usize {
        self.dropped.len()
    }

    /// First interval with the given label.
    pub fn labeled(&self, label: RpLabel) -> Option<&RpInterval> {
        self.intervals.iter().find(|i| i.label == label)
    }

    /// Reported and dropped intervals in time order.
    pub fn all_intervals(&self) -> Vec<RpInterval> {
        let mut all: Vec<RpInterval> = self.intervals.iter().chain(&self.dropped).copied().collect();
        all.sort_by_key(|i| i.start_frame);
        all
    }

    pub fn valid_transitions(&self) -> Vec<bool> {
        window_mask(&self.frame_times, self.rr_interval_ms, self.alpha_ms, self.omega_ms)
    }
}

/// Per transition: both frames inside `[alpha, rr - omega]`.
pub fn window_mask(frame_times: &[f64], rr_interval_ms: f64, alpha_ms: f64, omega_ms: f64) -> Vec<bool> {
    let hi = rr_interval_ms - omega_ms;
    frame_times.windows(2).map(|w| w[0] >= alpha_ms && w[1] <= hi).collect()
}

/// Group maximal runs of `true` into intervals.
fn runs(mask: &[bool], frame_times: &[f64]) -> Vec<RpInterval> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < mask.len() {
        if !mask[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < mask.len() && mask[k] {
            k += 1;
        }
        out.push(RpInterval {
            label: RpLabel::Unlabeled,
            start_ms: frame_times[start],
            end_ms: frame_times[k],
            start_frame: start,
            end_frame: k,
        });
    }
    out
}

/// Label intervals by the time of their midpoints.
///
/// With at most one interval per band each band gets its own label. When
/// one band is empty, the earliest interval of the other is systolic and the
/// latest diastolic. Otherwise the longest interval in each band carries its
/// band label and the rest stay unlabeled.
pub fn label_intervals(intervals: &mut [RpInterval], rr_interval_ms: f64) {
    let split = SYSTOLIC_BAND * rr_interval_ms;
    let (sys, dia): (Vec<usize>, Vec<usize>) = (0..intervals.len()).partition(|&i| intervals[i].midpoint_ms() < split);
    intervals.iter_mut().for_each(|i| i.label = RpLabel::Unlabeled);
    let longest = |idx: &[usize]| {
        idx.iter()
            .copied()
            .reduce(|a, b| if intervals[b].duration_ms() > intervals[a].duration_ms() { b } else { a })
    };
    let (s, d) = match (sys.len(), dia.len()) {
        (0, 0) => (None, None),
        (0, _) | (_, 0) if sys.len() + dia.len() == 1 => (sys.first().copied(), dia.first().copied()),
        (0, _) | (_, 0) => {
            let all = if sys.is_empty() { &dia } else { &sys };
            (all.first().copied(), all.last().copied())
        }
        _ => (longest(&sys), longest(&dia)),
    };
    if let Some(s) = s {
        intervals[s].label = RpLabel::Systolic;
    }
    if let Some(d) = d {
        intervals[d].label = RpLabel::Diastolic;
    }
}

/// Build a labeled set from a resting mask that already respects the window.
pub fn rest_set_from_mask(
    mask: &[bool],
    frame_times: &[f64],
    rr_interval_ms: f64,
    params: &RpParams,
) -> Result<RestingPhaseSet> {
    params.validate(rr_interval_ms)?;
    if mask.is_empty() {
        return Err(Error::EmptyInput);
    }
    if frame_times.len() != mask.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: mask.len() + 1,
            actual: frame_times.len(),
        });
    }
    let (mut intervals, dropped): (Vec<RpInterval>, Vec<RpInterval>) = runs(mask, frame_times)
        .into_iter()
        .partition(|i| i.duration_ms() >= params.min_duration_ms);
    label_intervals(&mut intervals, rr_interval_ms);
    Ok(RestingPhaseSet {
        intervals,
        dropped,
        rp_mask: mask.to_vec(),
        tau: params.tau,
        alpha_ms: params.alpha_ms,
        omega_ms: params.omega_ms,
        rr_interval_ms,
        frame_times: frame_times.to_vec(),
    })
}

pub fn classify_rp(curve: &MotionCurve, rr_interval_ms: f64, params: &RpParams) -> Result<RestingPhaseSet> {
    params.validate(rr_interval_ms)?;
    if curve.is_empty() {
        return Err(Error::EmptyInput);
    }
    if curve.frame_times.len() != curve.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: curve.len() + 1,
            actual: curve.frame_times.len(),
        });
    }
    let window = window_mask(&curve.frame_times, rr_interval_ms, params.alpha_ms, params.omega_ms);
    let mask: Vec<bool> = curve
        .values
        .iter()
        .zip(&window)
        .map(|(&v, &w)| w && v < params.tau)
        .collect();
    rest_set_from_mask(&mask, &curve.frame_times, rr_interval_ms, params)
}

/// Per transition: eligible and covered by one of the set's reported
/// intervals.
pub fn rp_overlap_mask(rp: &RestingPhaseSet, frame_times: &[f64]) -> Vec<bool> {
    let window = window_mask(frame_times, rp.rr_interval_ms, rp.alpha_ms, rp.omega_ms);
    frame_times
        .windows(2)
        .zip(window)
        .map(|(w, ok)| ok && rp.intervals.iter().any(|i| i.start_ms <= w[0] && w[1] <= i.end_ms))
        .collect()
}
