//! Threshold calibration and agreement statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classification::{window_mask, RestingPhaseSet, RpInterval, RpLabel};
use crate::error::{Error, Result};
use crate::model::LandmarkTrack;
use crate::motion::{motion_curve, MotionParams, MotionVariant};
use crate::registration::DeformationField;
use crate::stats::mean_std;

/// Number of thresholds in the sweep grid.
pub const TAU_STEPS: usize = 100;

/// `0.01, 0.02, ..., 1.00`.
pub fn tau_grid() -> Vec<f64> {
    (1..=TAU_STEPS).map(|k| k as f64 / TAU_STEPS as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledTransition {
    pub motion_value: f64,
    pub is_rest: bool,
    pub in_valid_window: bool,
}

/// Pair each curve value with its truth label and window flag.
pub fn labeled_transitions(
    values: &[f64],
    frame_times: &[f64],
    truth_rest: &[bool],
    rr_interval_ms: f64,
    alpha_ms: f64,
    omega_ms: f64,
) -> Result<Vec<LabeledTransition>> {
    if truth_rest.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: values.len(),
            actual: truth_rest.len(),
        });
    }
    if frame_times.len() != values.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: values.len() + 1,
            actual: frame_times.len(),
        });
    }
    let window = window_mask(frame_times, rr_interval_ms, alpha_ms, omega_ms);
    Ok(values
        .iter()
        .zip(truth_rest)
        .zip(window)
        .map(|((&motion_value, &is_rest), in_valid_window)| LabeledTransition {
            motion_value,
            is_rest,
            in_valid_window,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl ConfusionMatrix {
    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }

    pub fn tpr(&self) -> Option<f64> {
        ratio(self.tp, self.positives())
    }

    pub fn tnr(&self) -> Option<f64> {
        ratio(self.tn, self.negatives())
    }

    pub fn fpr(&self) -> Option<f64> {
        ratio(self.fp, self.negatives())
    }

    pub fn fnr(&self) -> Option<f64> {
        ratio(self.fn_, self.positives())
    }

    pub fn balanced_accuracy(&self) -> Option<f64> {
        Some(0.5 * (self.tpr()? + self.tnr()?))
    }

    /// Row-normalized matrix: `[[tpr, fnr], [fpr, tnr]]` (truth rows).
    pub fn rates(&self) -> [[Option<f64>; 2]; 2] {
        [[self.tpr(), self.fnr()], [self.fpr(), self.tnr()]]
    }

    fn add(&mut self, predicted: bool, truth: bool) {
        match (predicted, truth) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }
}

pub fn confusion_matrix(predicted: &[bool], truth: &[bool]) -> Result<ConfusionMatrix> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let mut m = ConfusionMatrix::default();
    predicted.iter().zip(truth).for_each(|(&p, &t)| m.add(p, t));
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub counts: ConfusionMatrix,
    pub tpr: f64,
    pub tnr: f64,
    pub balanced_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub best_tau: f64,
    pub best_index: usize,
    pub auc: f64,
}

impl SweepResult {
    pub fn best(&self) -> &SweepRow {
        &self.rows[self.best_index]
    }

    /// `(fpr, tpr)` per grid threshold, in grid order.
    pub fn roc_points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (1.0 - r.tnr, r.tpr)).collect()
    }
}

/// Confusion counts at one threshold over in-window transitions.
pub fn counts_at(labeled: &[LabeledTransition], tau: f64) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for l in labeled.iter().filter(|l| l.in_valid_window) {
        m.add(l.motion_value < tau, l.is_rest);
    }
    m
}

/// Trapezoidal area under `(fpr, tpr)` points closed by `(0,0)` and `(1,1)`.
pub fn roc_auc(points: &[(f64, f64)]) -> f64 {
    let mut pts = Vec::with_capacity(points.len() + 2);
    pts.push((0.0, 0.0));
    pts.extend_from_slice(points);
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2).map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1)).sum()
}

/// Sweep the threshold grid over pooled in-window transitions.
pub fn threshold_sweep(labeled: &[LabeledTransition]) -> Result<SweepResult> {
    let all = counts_at(labeled, f64::INFINITY);
    if labeled.iter().any(|l| !l.motion_value.is_finite()) {
        return Err(Error::InvalidParams("motion values must be finite".into()));
    }
    if all.positives() == 0 || all.negatives() == 0 {
        return Err(Error::DegenerateLabels {
            positives: all.positives(),
            negatives: all.negatives(),
        });
    }
    let rows: Vec<SweepRow> = tau_grid()
        .into_iter()
        .map(|tau| {
            let counts = counts_at(labeled, tau);
            let tpr = counts.tpr().unwrap_or(0.0);
            let tnr = counts.tnr().unwrap_or(0.0);
            SweepRow {
                tau,
                counts,
                tpr,
                tnr,
                balanced_accuracy: 0.5 * (tpr + tnr),
            }
        })
        .collect();
    let mut best_index = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.balanced_accuracy > rows[best_index].balanced_accuracy {
            best_index = i;
        }
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (1.0 - r.tnr, r.tpr)).collect();
    Ok(SweepResult {
        best_tau: rows[best_index].tau,
        best_index,
        auc: roc_auc(&points),
        rows,
    })
}

/// Inputs of one cohort member for the variant comparison. `track` is in the
/// fields' coordinate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantCase {
    pub fields: Vec<DeformationField>,
    pub track: LandmarkTrack,
    pub frame_times: Vec<f64>,
    pub rr_interval_ms: f64,
    pub truth_rest: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub best_tau: f64,
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub auc: f64,
}

impl From<&SweepResult> for VariantSummary {
    fn from(s: &SweepResult) -> Self {
        let b = s.best();
        Self {
            best_tau: s.best_tau,
            accuracy: b.balanced_accuracy,
            sensitivity: b.tpr,
            specificity: b.tnr,
            auc: s.auc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantRow {
    pub variant: MotionVariant,
    pub outcome: Result<VariantSummary>,
}

/// Pooled labeled transitions of a cohort under one motion setting.
pub fn cohort_labels(cases: &[VariantCase], motion: &MotionParams, alpha_ms: f64, omega_ms: f64) -> Result<Vec<LabeledTransition>> {
    let mut out = Vec::new();
    for c in cases {
        let curve = motion_curve(&c.fields, &c.track, &c.frame_times, motion)?;
        out.extend(labeled_transitions(&curve.values, &c.frame_times, &c.truth_rest, c.rr_interval_ms, alpha_ms, omega_ms)?);
    }
    Ok(out)
}

/// Threshold sweep for every variant. Failures are reported per row.
pub fn variant_sweep(
    cases: &[VariantCase],
    variants: &[MotionVariant],
    sigma: f64,
    alpha_ms: f64,
    omega_ms: f64,
) -> Vec<VariantRow> {
    variants
        .par_iter()
        .map(|&variant| {
            let motion = MotionParams {
                variant,
                sigma,
                squared: false,
            };
            let outcome = cohort_labels(cases, &motion, alpha_ms, omega_ms)
                .and_then(|l| threshold_sweep(&l))
                .map(|s| VariantSummary::from(&s));
            VariantRow { variant, outcome }
        })
        .collect()
}

/// Timing of one dataset for agreement statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub frame_times: Vec<f64>,
    pub rr_interval_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgreementParams {
    pub alpha_ms: f64,
    pub omega_ms: f64,
    /// Reference intervals shorter than this are excluded.
    pub min_reference_ms: f64,
}

impl Default for AgreementParams {
    fn default() -> Self {
        Self {
            alpha_ms: 80.0,
            omega_ms: 80.0,
            min_reference_ms: 30.0,
        }
    }
}

/// Signed predicted-minus-reference endpoint differences of one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointDelta {
    pub dataset: usize,
    pub start_ms: f64,
    pub end_ms: f64,
    pub start_frames: i64,
    pub end_frames: i64,
}

/// Mean absolute error and population std of the absolute error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EndpointStats {
    pub n: usize,
    pub mae_ms: f64,
    pub std_ms: f64,
    pub mae_frames: f64,
    pub std_frames: f64,
    pub mean_difference_ms: f64,
}

impl EndpointStats {
    fn from_deltas(ms: &[f64], frames: &[i64]) -> Self {
        let abs_ms: Vec<f64> = ms.iter().map(|d| d.abs()).collect();
        let abs_frames: Vec<f64> = frames.iter().map(|d| d.unsigned_abs() as f64).collect();
        let (mae_ms, std_ms) = mean_std(&abs_ms);
        let (mae_frames, std_frames) = mean_std(&abs_frames);
        Self {
            n: ms.len(),
            mae_ms,
            std_ms,
            mae_frames,
            std_frames,
            mean_difference_ms: mean_std(ms).0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeAgreement {
    pub label: RpLabel,
    pub total: usize,
    /// Datasets whose reference has a long enough interval of this type.
    pub included: usize,
    pub excluded_short: usize,
    pub excluded_missing: usize,
    /// Included datasets without a predicted interval of this type.
    pub missed: usize,
    pub start: EndpointStats,
    pub end: EndpointStats,
    /// Mean and std of scored durations in ms.
    pub predicted_duration_ms: (f64, f64),
    pub reference_duration_ms: (f64, f64),
    pub deltas: Vec<EndpointDelta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlandAltman {
    /// `(mean of both, predicted - reference)` per scored endpoint, in ms.
    pub points: Vec<(f64, f64)>,
    pub mean_difference: f64,
    pub std_difference: f64,
    pub lower_limit: f64,
    pub upper_limit: f64,
}

impl BlandAltman {
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        let points: Vec<(f64, f64)> = pairs.iter().map(|&(p, r)| (0.5 * (p + r), p - r)).collect();
        let diffs: Vec<f64> = points.iter().map(|p| p.1).collect();
        let (mean_difference, std_difference) = mean_std(&diffs);
        Self {
            points,
            mean_difference,
            std_difference,
            lower_limit: mean_difference - 1.96 * std_difference,
            upper_limit: mean_difference + 1.96 * std_difference,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpAgreement {
    pub datasets: usize,
    pub systolic: TypeAgreement,
    pub diastolic: TypeAgreement,
    /// Predicted intervals not matched to a reference interval.
    pub false_interval_findings: usize,
    /// Pooled over in-window transitions of all datasets.
    pub confusion: ConfusionMatrix,
    pub bland_altman: BlandAltman,
}

impl RpAgreement {
    pub fn by_label(&self, label: RpLabel) -> Option<&TypeAgreement> {
        match label {
            RpLabel::Systolic => Some(&self.systolic),
            RpLabel::Diastolic => Some(&self.diastolic),
            RpLabel::Unlabeled => None,
        }
    }
}

fn cover_mask(intervals: &[RpInterval], frame_times: &[f64]) -> Vec<bool> {
    frame_times
        .windows(2)
        .map(|w| intervals.iter().any(|i| i.start_ms <= w[0] && w[1] <= i.end_ms))
        .collect()
}

struct TypeScore {
    agreement: TypeAgreement,
    matched: Vec<Option<usize>>,
    pairs: Vec<(f64, f64)>,
}

fn score_type(label: RpLabel, predicted: &[RestingPhaseSet], reference: &[RestingPhaseSet], params: &AgreementParams) -> TypeScore {
    let mut a = TypeAgreement {
        label,
        total: reference.len(),
        included: 0,
        excluded_short: 0,
        excluded_missing: 0,
        missed: 0,
        start: EndpointStats::default(),
        end: EndpointStats::default(),
        predicted_duration_ms: (0.0, 0.0),
        reference_duration_ms: (0.0, 0.0),
        deltas: Vec::new(),
    };
    let mut matched = vec![None; reference.len()];
    let mut pairs = Vec::new();
    let (mut pred_dur, mut ref_dur) = (Vec::new(), Vec::new());
    for (d, (pred, reference)) in predicted.iter().zip(reference).enumerate() {
        let Some(r) = reference.labeled(label) else {
            a.excluded_missing += 1;
            continue;
        };
        if r.duration_ms() < params.min_reference_ms {
            a.excluded_short += 1;
            continue;
        }
        a.included += 1;
        let best = pred
            .intervals
            .iter()
            .enumerate()
            .filter(|(_, i)| i.label == label)
            .fold(None, |best: Option<(usize, f64)>, (k, i)| {
                let o = i.overlap_ms(r);
                match best {
                    Some((_, bo)) if bo >= o => best,
                    _ => Some((k, o)),
                }
            });
        let Some((k, _)) = best else {
            a.missed += 1;
            continue;
        };
        matched[d] = Some(k);
        let p = &pred.intervals[k];
        a.deltas.push(EndpointDelta {
            dataset: d,
            start_ms: p.start_ms - r.start_ms,
            end_ms: p.end_ms - r.end_ms,
            start_frames: p.start_frame as i64 - r.start_frame as i64,
            end_frames: p.end_frame as i64 - r.end_frame as i64,
        });
        pairs.push((p.start_ms, r.start_ms));
        pairs.push((p.end_ms, r.end_ms));
        pred_dur.push(p.duration_ms());
        ref_dur.push(r.duration_ms());
    }
    let col = |f: fn(&EndpointDelta) -> f64| a.deltas.iter().map(f).collect::<Vec<f64>>();
    let colf = |f: fn(&EndpointDelta) -> i64| a.deltas.iter().map(f).collect::<Vec<i64>>();
    a.start = EndpointStats::from_deltas(&col(|d| d.start_ms), &colf(|d| d.start_frames));
    a.end = EndpointStats::from_deltas(&col(|d| d.end_ms), &colf(|d| d.end_frames));
    a.predicted_duration_ms = mean_std(&pred_dur);
    a.reference_duration_ms = mean_std(&ref_dur);
    TypeScore {
        agreement: a,
        matched,
        pairs,
    }
}

/// Compare predicted and reference resting phases dataset by dataset.
///
/// Intervals are matched by label; among several predicted intervals with
/// the same label the one overlapping the reference most is scored.
pub fn rp_agreement(
    predicted: &[RestingPhaseSet],
    reference: &[RestingPhaseSet],
    meta: &[SeriesMeta],
    params: &AgreementParams,
) -> Result<RpAgreement> {
    if predicted.len() != reference.len() || predicted.len() != meta.len() {
        return Err(Error::PairingMismatch(format!(
            "{} predicted, {} reference, {} series",
            predicted.len(),
            reference.len(),
            meta.len()
        )));
    }
    for (d, ((p, r), m)) in predicted.iter().zip(reference).zip(meta).enumerate() {
        let n = m.frame_times.len();
        if p.frame_times.len() != n || r.frame_times.len() != n {
            return Err(Error::PairingMismatch(format!("dataset {d}: frame counts differ")));
        }
    }
    let sys = score_type(RpLabel::Systolic, predicted, reference, params);
    let dia = score_type(RpLabel::Diastolic, predicted, reference, params);

    let mut false_interval_findings = 0;
    for (d, p) in predicted.iter().enumerate() {
        let matched = [sys.matched[d], dia.matched[d]].iter().filter(|m| m.is_some()).count();
        false_interval_findings += p.intervals.len() - matched;
    }

    let mut confusion = ConfusionMatrix::default();
    for ((p, r), m) in predicted.iter().zip(reference).zip(meta) {
        let window = window_mask(&m.frame_times, m.rr_interval_ms, params.alpha_ms, params.omega_ms);
        let pm = cover_mask(&p.intervals, &m.frame_times);
        let rm = cover_mask(&r.intervals, &m.frame_times);
        for k in (0..window.len()).filter(|&k| window[k]) {
            confusion.add(pm[k], rm[k]);
        }
    }

    let pairs: Vec<(f64, f64)> = sys.pairs.iter().chain(&dia.pairs).copied().collect();
    Ok(RpAgreement {
        datasets: predicted.len(),
        systolic: sys.agreement,
        diastolic: dia.agreement,
        false_interval_findings,
        confusion,
        bland_altman: BlandAltman::from_pairs(&pairs),
    })
}
