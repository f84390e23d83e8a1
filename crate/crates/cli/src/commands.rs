use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use restphase_core::calibration::{
    cohort_labels, counts_at, rp_agreement, threshold_sweep, variant_sweep, RpAgreement, SeriesMeta, SweepResult,
    VariantCase,
};
use restphase_core::classification::{rest_set_from_mask, window_mask, RpParams};
use restphase_core::model::{CineSeries, PixelPoint};
use restphase_core::motion::MotionVariant;
use restphase_core::phantom::{generate_cohort, generate_phantom, PhantomCase, PhantomConfig, PhantomTruth};
use restphase_core::pipeline::{register_stages, run_pipeline, PipelineConfig, PipelineError, Registered};
use restphase_core::Error;

use crate::args::{CalibrateArgs, EvaluateArgs, Overrides, PhantomArgs, ReportArgs, RunArgs};
use crate::config::Config;
use crate::formats::*;
use crate::plots::{range_of, render, Axes, Mark};

/// Command failure with its exit code class.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or unreadable input (exit 2).
    Config(anyhow::Error),
    /// A pipeline stage failed (exit 3).
    Stage(PipelineError),
    /// Calibration labels lack a class (exit 4).
    Degenerate(anyhow::Error),
    /// Predictions and references do not pair up (exit 5).
    Pairing(anyhow::Error),
    /// Anything else, e.g. a failed write (exit 1).
    Other(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Other(_) => 1,
            Failure::Config(_) => 2,
            Failure::Stage(_) => 3,
            Failure::Degenerate(_) => 4,
            Failure::Pairing(_) => 5,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Stage(e) => write!(f, "pipeline error: {e}"),
            Failure::Degenerate(e) => write!(f, "calibration error: {e:#}"),
            Failure::Pairing(e) => write!(f, "pairing error: {e:#}"),
            Failure::Other(e) => write!(f, "error: {e:#}"),
        }
    }
}

type Outcome = Result<(), Failure>;

trait Classify<T> {
    fn config(self) -> Result<T, Failure>;
    fn other(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn other(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Other(e.into()))
    }
}

fn apply_overrides(cfg: &mut PipelineConfig, o: &Overrides) -> anyhow::Result<()> {
    if let Some(tau) = o.tau {
        cfg.rp.tau = tau;
    }
    if let Some(a) = o.alpha_ms {
        cfg.rp.alpha_ms = a;
    }
    if let Some(w) = o.omega_ms {
        cfg.rp.omega_ms = w;
    }
    if let Some(s) = o.sigma {
        cfg.motion.sigma = s;
    }
    let n = o.percentile;
    cfg.motion.variant = match (o.variant.as_deref(), n) {
        (Some(v), _) if v.contains('(') => {
            anyhow::ensure!(n.is_none(), "--percentile conflicts with {v}");
            v.parse()?
        }
        (Some("pct"), n) => MotionVariant::Pct(n.unwrap_or(50.0)),
        (Some("wpct"), n) => MotionVariant::Wpct(n.unwrap_or(50.0)),
        (Some(v), None) => v.parse()?,
        (Some(v), Some(_)) => anyhow::bail!("--percentile does not apply to variant {v}"),
        (None, Some(n)) => match cfg.motion.variant {
            MotionVariant::Pct(_) => MotionVariant::Pct(n),
            MotionVariant::Wpct(_) => MotionVariant::Wpct(n),
            v => anyhow::bail!("--percentile does not apply to variant {v}"),
        },
        (None, None) => cfg.motion.variant,
    };
    cfg.motion.validate()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub schema_version: u32,
    pub config: PhantomConfig,
    #[serde(flatten)]
    pub truth: PhantomTruth,
}

fn truth_rest_set(truth: &PhantomTruth, series: &CineSeries, rp: &RpParams) -> Result<RpReport, Error> {
    let times = series.trigger_times();
    let window = window_mask(times, series.rr_interval(), rp.alpha_ms, rp.omega_ms);
    let mask: Vec<bool> = truth.resting_frames.iter().zip(&window).map(|(r, w)| *r && *w).collect();
    let params = RpParams {
        min_duration_ms: 0.0,
        ..*rp
    };
    Ok(RpReport::from(&rest_set_from_mask(&mask, times, series.rr_interval(), &params)?))
}

fn write_case(dir: &Path, case: &PhantomCase, rp: &RpParams) -> anyhow::Result<()> {
    write_series(dir, &case.series)?;
    write_json(
        &dir.join(TRUTH_JSON),
        &TruthFile {
            schema_version: SCHEMA_VERSION,
            config: case.config.clone(),
            truth: case.truth.clone(),
        },
    )?;
    write_json(&dir.join(TRUTH_RP_JSON), &truth_rest_set(&case.truth, &case.series, rp)?)?;
    let p0 = case.truth.track.points[0];
    write_json(
        &dir.join(ANNOTATION_JSON),
        &Annotation {
            schema_version: SCHEMA_VERSION,
            frame: 0,
            x: p0.x,
            y: p0.y,
        },
    )
}

pub fn phantom(args: &PhantomArgs) -> Outcome {
    let cfg = Config::load(args.config.as_deref()).config()?;
    let mut base = cfg.phantom.clone();
    let size = args.cohort.or(cfg.cohort.size);
    let cases = match size {
        None => {
            if let Some(seed) = args.seed {
                base.seed = seed;
            }
            let (series, truth) = generate_phantom(&base).config()?;
            vec![PhantomCase {
                config: base,
                series,
                truth,
            }]
        }
        Some(n) => generate_cohort(&base, &cfg.cohort.ranges, n, args.seed.unwrap_or(base.seed)).config()?,
    };
    // every truth set must be valid before anything is written
    for c in &cases {
        truth_rest_set(&c.truth, &c.series, &cfg.pipeline.rp).config()?;
    }
    match size {
        None => write_case(&args.out, &cases[0], &cfg.pipeline.rp).other()?,
        Some(_) => {
            for (i, c) in cases.iter().enumerate() {
                write_case(&args.out.join(member_name(i)), c, &cfg.pipeline.rp).other()?;
            }
        }
    }
    info!("wrote {} phantom(s) to {}", cases.len(), args.out.display());
    Ok(())
}

fn landmark(series_dir: &Path, args: &RunArgs) -> Result<Option<PixelPoint>, Failure> {
    if let (Some(x), Some(y)) = (args.x, args.y) {
        return Ok(Some(PixelPoint::new(x, y)));
    }
    let path = match &args.annotation {
        Some(p) => p.clone(),
        None => series_dir.join(ANNOTATION_JSON),
    };
    if args.annotation.is_none() && !path.exists() {
        return Ok(None);
    }
    Ok(Some(read_annotation(&path).config()?.point()))
}

fn run_one(series_dir: &Path, out: &Path, cfg: &PipelineConfig, args: &RunArgs) -> Outcome {
    let series = read_series(series_dir).config()?;
    let p0 = landmark(series_dir, args)?;
    let output = run_pipeline(&series, p0, cfg).map_err(Failure::Stage)?;
    for t in output.timings() {
        info!("{}: {} {:.1} ms", series_dir.display(), t.stage, t.elapsed.as_secs_f64() * 1e3);
    }
    if output.registered.normalization.constant_intensity {
        warn!("{}: constant intensity", series_dir.display());
    }
    let write = || -> anyhow::Result<()> {
        write_json(&out.join("track.json"), &TrackFile::new(&output.registered.track))?;
        write_json(&out.join("roi.json"), &RoiFile::new(&output.registered.roi))?;
        write_atomic(&out.join("curve.csv"), curve_csv(&output.curve).as_bytes())?;
        write_json(&out.join(RP_JSON), &RpReport::from(&output.rest))?;
        if args.emit_fields {
            for f in &output.registered.fields {
                write_field(&out.join("fields"), f)?;
            }
        }
        Ok(())
    };
    write().other()
}

pub fn run(args: &RunArgs) -> Outcome {
    let cfg = Config::load(args.config.as_deref()).config()?;
    let mut pipeline = cfg.pipeline;
    apply_overrides(&mut pipeline, &args.overrides).config()?;
    if args.series.join(SERIES_JSON).exists() {
        return run_one(&args.series, &args.out, &pipeline, args);
    }
    let members = member_dirs(&args.series).config()?;
    if members.is_empty() {
        return Err(Failure::Config(anyhow!("{} holds no series", args.series.display())));
    }
    members
        .par_iter()
        .map(|m| run_one(m, &args.out.join(m.file_name().unwrap()), &pipeline, args))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

struct Member {
    name: String,
    registered: Registered,
    truth_rest: Vec<bool>,
}

fn load_members(dir: &Path, cfg: &PipelineConfig) -> Result<Vec<Member>, Failure> {
    let dirs = if dir.join(SERIES_JSON).exists() {
        vec![dir.to_path_buf()]
    } else {
        member_dirs(dir).config()?
    };
    if dirs.is_empty() {
        return Err(Failure::Config(anyhow!("{} holds no series", dir.display())));
    }
    dirs.par_iter()
        .map(|d| {
            let series = read_series(d).config()?;
            let truth: TruthFile = read_json(&d.join(TRUTH_JSON)).config()?;
            let p0 = read_annotation(&d.join(ANNOTATION_JSON)).config()?.point();
            let registered = register_stages(&series, Some(p0), cfg).map_err(Failure::Stage)?;
            Ok(Member {
                name: d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                registered,
                truth_rest: truth.truth.resting_frames,
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BestTau {
    pub schema_version: u32,
    pub variant: MotionVariant,
    pub sigma: f64,
    pub alpha_ms: f64,
    pub omega_ms: f64,
    pub best_tau: f64,
    pub balanced_accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub auc: f64,
    pub positives: usize,
    pub negatives: usize,
}

fn sweep_csv(s: &SweepResult) -> String {
    let mut out = String::from("tau,tp,fp,tn,fn,tpr,tnr,balanced_accuracy\n");
    for r in &s.rows {
        let c = r.counts;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.tau, c.tp, c.fp, c.tn, c.fn_, r.tpr, r.tnr, r.balanced_accuracy
        ));
    }
    out
}

fn roc_csv(s: &SweepResult) -> String {
    let mut out = String::from("tau,fpr,tpr\n");
    for (r, (fpr, tpr)) in s.rows.iter().zip(s.roc_points()) {
        out.push_str(&format!("{},{fpr},{tpr}\n", r.tau));
    }
    out
}

pub fn calibrate(args: &CalibrateArgs) -> Outcome {
    let cfg = Config::load(args.config.as_deref()).config()?;
    let mut pipeline = cfg.pipeline.clone();
    apply_overrides(&mut pipeline, &args.overrides).config()?;
    let members = load_members(&args.cohort, &pipeline)?;
    let (alpha, omega) = (pipeline.rp.alpha_ms, pipeline.rp.omega_ms);
    let cases: Vec<VariantCase> = members
        .iter()
        .map(|m| VariantCase {
            fields: m.registered.fields.clone(),
            track: m.registered.roi_track.clone(),
            frame_times: m.registered.frame_times.clone(),
            rr_interval_ms: m.registered.rr_interval_ms,
            truth_rest: m.truth_rest.clone(),
        })
        .collect();
    let labels = cohort_labels(&cases, &pipeline.motion, alpha, omega).config()?;
    let sweep = threshold_sweep(&labels).map_err(|e| match e {
        Error::DegenerateLabels { .. } => Failure::Degenerate(e.into()),
        e => Failure::Config(e.into()),
    })?;
    let best = sweep.best();
    info!("best tau {} with balanced accuracy {:.4}", sweep.best_tau, best.balanced_accuracy);

    let mut per_dataset = String::from("member,transitions,tp,fp,tn,fn,balanced_accuracy\n");
    for (m, c) in members.iter().zip(&cases) {
        let l = cohort_labels(std::slice::from_ref(c), &pipeline.motion, alpha, omega).config()?;
        let k = counts_at(&l, sweep.best_tau);
        let ba = k.balanced_accuracy().map(|v| v.to_string()).unwrap_or_default();
        per_dataset.push_str(&format!("{},{},{},{},{},{},{ba}\n", m.name, l.len(), k.tp, k.fp, k.tn, k.fn_));
    }

    let out = &args.out;
    let write = || -> anyhow::Result<()> {
        write_atomic(&out.join("sweep.csv"), sweep_csv(&sweep).as_bytes())?;
        write_atomic(&out.join("roc.csv"), roc_csv(&sweep).as_bytes())?;
        write_atomic(&out.join("per_dataset.csv"), per_dataset.as_bytes())?;
        write_json(
            &out.join("best_tau.json"),
            &BestTau {
                schema_version: SCHEMA_VERSION,
                variant: pipeline.motion.variant,
                sigma: pipeline.motion.sigma,
                alpha_ms: alpha,
                omega_ms: omega,
                best_tau: sweep.best_tau,
                balanced_accuracy: best.balanced_accuracy,
                sensitivity: best.tpr,
                specificity: best.tnr,
                auc: sweep.auc,
                positives: best.counts.positives(),
                negatives: best.counts.negatives(),
            },
        )?;
        if args.variant_sweep || cfg.calibration.variant_sweep {
            let rows = variant_sweep(&cases, &cfg.calibration.variants, pipeline.motion.sigma, alpha, omega);
            let mut csv = String::from("variant,accuracy,sensitivity,specificity,best_tau,auc,error\n");
            for r in rows {
                match r.outcome {
                    Ok(s) => csv.push_str(&format!(
                        "\"{}\",{},{},{},{},{},\n",
                        r.variant, s.accuracy, s.sensitivity, s.specificity, s.best_tau, s.auc
                    )),
                    Err(e) => csv.push_str(&format!("\"{}\",,,,,,\"{e}\"\n", r.variant)),
                }
            }
            write_atomic(&out.join("variant_sweep.csv"), csv.as_bytes())?;
        }
        if args.svg {
            let mut roc = vec![(0.0, 0.0)];
            roc.extend(sweep.roc_points());
            roc.push((1.0, 1.0));
            roc.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let diag = [(0.0, 0.0), (1.0, 1.0)];
            let axes = Axes {
                title: format!("ROC (AUC {:.3})", sweep.auc),
                x_label: "1 - specificity".into(),
                y_label: "sensitivity".into(),
                x_range: (0.0, 1.0),
                y_range: (0.0, 1.0),
            };
            write_atomic(
                &out.join("roc.svg"),
                render(&axes, &[Mark::Line(&diag, "lightgray"), Mark::Line(&roc, "steelblue")]).as_bytes(),
            )?;
            let acc: Vec<(f64, f64)> = sweep.rows.iter().map(|r| (r.tau, r.balanced_accuracy)).collect();
            let axes = Axes {
                title: format!("balanced accuracy, best tau {}", sweep.best_tau),
                x_label: "tau".into(),
                y_label: "balanced accuracy".into(),
                x_range: (0.0, 1.0),
                y_range: (0.0, 1.0),
            };
            write_atomic(
                &out.join("accuracy.svg"),
                render(&axes, &[Mark::Line(&acc, "steelblue"), Mark::VLine(sweep.best_tau, "firebrick")]).as_bytes(),
            )?;
        }
        Ok(())
    };
    write().other()
}

fn rp_file(dir: &Path) -> PathBuf {
    let rp = dir.join(RP_JSON);
    if rp.exists() {
        rp
    } else {
        dir.join(TRUTH_RP_JSON)
    }
}

fn paired_files(pred: &Path, reference: &Path) -> Result<Vec<(PathBuf, PathBuf)>, Failure> {
    let single = rp_file(pred);
    if single.exists() {
        let r = rp_file(reference);
        if !r.exists() {
            return Err(Failure::Pairing(anyhow!("{} has no reference report", reference.display())));
        }
        return Ok(vec![(single, r)]);
    }
    let names = |d: &Path| -> Result<Vec<String>, Failure> {
        Ok(member_dirs(d)
            .config()?
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect())
    };
    let (p, r) = (names(pred)?, names(reference)?);
    if p.is_empty() {
        return Err(Failure::Config(anyhow!("{} holds no predictions", pred.display())));
    }
    if p != r {
        return Err(Failure::Pairing(anyhow!(
            "{} members in {} vs {} in {}",
            p.len(),
            pred.display(),
            r.len(),
            reference.display()
        )));
    }
    Ok(p.iter().map(|n| (rp_file(&pred.join(n)), rp_file(&reference.join(n)))).collect())
}

fn agreement_csv(a: &RpAgreement) -> String {
    let mut s = String::from(
        "type,endpoint,n,mae_ms,std_ms,mae_frames,std_frames,mean_difference_ms,included,excluded_short,excluded_missing,missed\n",
    );
    for t in [&a.systolic, &a.diastolic] {
        let label = serde_json::to_value(t.label).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        for (name, e) in [("start", &t.start), ("end", &t.end)] {
            s.push_str(&format!(
                "{label},{name},{},{},{},{},{},{},{},{},{},{}\n",
                e.n, e.mae_ms, e.std_ms, e.mae_frames, e.std_frames, e.mean_difference_ms, t.included, t.excluded_short,
                t.excluded_missing, t.missed
            ));
        }
    }
    s
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfusionFile {
    pub schema_version: u32,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tpr: Option<f64>,
    pub fnr: Option<f64>,
    pub fpr: Option<f64>,
    pub tnr: Option<f64>,
    pub balanced_accuracy: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AgreementFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub agreement: RpAgreement,
}

pub fn evaluate(args: &EvaluateArgs) -> Outcome {
    let cfg = Config::load(args.config.as_deref()).config()?;
    let mut params = cfg.evaluation;
    if let Some(a) = args.alpha_ms {
        params.alpha_ms = a;
    }
    if let Some(o) = args.omega_ms {
        params.omega_ms = o;
    }
    let pairs = paired_files(&args.pred, &args.reference)?;
    let mut predicted = Vec::new();
    let mut reference = Vec::new();
    for (p, r) in &pairs {
        predicted.push(read_rp(p).config()?);
        reference.push(read_rp(r).config()?);
    }
    let meta: Vec<SeriesMeta> = reference
        .iter()
        .map(|r| SeriesMeta {
            frame_times: r.frame_times.clone(),
            rr_interval_ms: r.rr_interval_ms,
        })
        .collect();
    let a = rp_agreement(&predicted, &reference, &meta, &params).map_err(|e| match e {
        Error::PairingMismatch(_) => Failure::Pairing(e.into()),
        e => Failure::Config(e.into()),
    })?;
    let c = a.confusion;
    let out = &args.out;
    let write = || -> anyhow::Result<()> {
        write_atomic(&out.join("agreement.csv"), agreement_csv(&a).as_bytes())?;
        write_json(
            &out.join("agreement.json"),
            &AgreementFile {
                schema_version: SCHEMA_VERSION,
                agreement: a.clone(),
            },
        )?;
        write_json(
            &out.join("confusion.json"),
            &ConfusionFile {
                schema_version: SCHEMA_VERSION,
                tp: c.tp,
                fp: c.fp,
                tn: c.tn,
                fn_: c.fn_,
                tpr: c.tpr(),
                fnr: c.fnr(),
                fpr: c.fpr(),
                tnr: c.tnr(),
                balanced_accuracy: c.balanced_accuracy(),
            },
        )?;
        let ba = &a.bland_altman;
        let mut csv = String::from("mean_ms,difference_ms\n");
        for (m, d) in &ba.points {
            csv.push_str(&format!("{m},{d}\n"));
        }
        write_atomic(&out.join("bland_altman.csv"), csv.as_bytes())?;
        let axes = Axes {
            title: format!("Bland-Altman: {:.1} ms [{:.1}, {:.1}]", ba.mean_difference, ba.lower_limit, ba.upper_limit),
            x_label: "mean of predicted and reference (ms)".into(),
            y_label: "predicted - reference (ms)".into(),
            x_range: range_of(ba.points.iter().map(|p| p.0)),
            y_range: range_of(ba.points.iter().map(|p| p.1).chain([ba.lower_limit, ba.upper_limit])),
        };
        let marks = [
            Mark::Points(&ba.points, "steelblue"),
            Mark::HLine(ba.mean_difference, "black"),
            Mark::HLine(ba.lower_limit, "firebrick"),
            Mark::HLine(ba.upper_limit, "firebrick"),
        ];
        write_atomic(&out.join("bland_altman.svg"), render(&axes, &marks).as_bytes())
    };
    write().other()
}

/// Clinical reference values, from a patient cohort that cannot be
/// reproduced here.
const CLINICAL_REFERENCE: [(&str, f64); 2] = [("wpct(50)", 90.1), ("pct(50)", 87.2)];

pub fn report(args: &ReportArgs) -> Outcome {
    let mut md = String::from("# Resting-phase detection report\n");
    if let Some(dir) = &args.calibration {
        let best: BestTau = read_json(&dir.join("best_tau.json")).config()?;
        md.push_str(&format!(
            "\n## Calibration\n\n| variant | best tau | balanced accuracy | sensitivity | specificity | AUC |\n|---|---|---|---|---|---|\n| {} | {} | {:.1}% | {:.1}% | {:.1}% | {:.3} |\n",
            best.variant,
            best.best_tau,
            100.0 * best.balanced_accuracy,
            100.0 * best.sensitivity,
            100.0 * best.specificity,
            best.auc
        ));
        let vs = dir.join("variant_sweep.csv");
        if vs.exists() {
            let text = fs::read_to_string(&vs).config()?;
            md.push_str("\n## Motion variants\n\n| variant | accuracy (%) | best tau | source |\n|---|---|---|---|\n");
            for line in text.lines().skip(1) {
                let cols: Vec<&str> = line.split(',').collect();
                let name = cols.first().map(|s| s.trim_matches('"')).unwrap_or("");
                match cols.get(1).and_then(|v| v.parse::<f64>().ok()) {
                    Some(acc) => md.push_str(&format!("| {name} | {:.1} | {} | synthetic cohort |\n", 100.0 * acc, cols[4])),
                    None => md.push_str(&format!("| {name} | n/a | n/a | synthetic cohort |\n")),
                }
            }
            for (name, acc) in CLINICAL_REFERENCE {
                md.push_str(&format!("| {name} | {acc} | n/a | clinical reference, not reproducible here |\n"));
            }
        }
    }
    if let Some(dir) = &args.evaluation {
        let a: AgreementFile = read_json(&dir.join("agreement.json")).config()?;
        let a = a.agreement;
        md.push_str(&format!(
            "\n## Agreement ({} datasets)\n\n| type | endpoint | n | MAE (ms) | MAE (frames) |\n|---|---|---|---|---|\n",
            a.datasets
        ));
        for (t, name) in [(&a.systolic, "systolic"), (&a.diastolic, "diastolic")] {
            for (e, which) in [(&t.start, "start"), (&t.end, "end")] {
                md.push_str(&format!(
                    "| {name} | {which} | {} | {:.1} ± {:.1} | {:.2} ± {:.2} |\n",
                    e.n, e.mae_ms, e.std_ms, e.mae_frames, e.std_frames
                ));
            }
        }
        let ba = &a.bland_altman;
        md.push_str(&format!(
            "\nBland-Altman mean difference {:.1} ms, limits [{:.1}, {:.1}] ms. False interval findings: {}.\n",
            ba.mean_difference, ba.lower_limit, ba.upper_limit, a.false_interval_findings
        ));
    }
    match &args.out {
        Some(p) => write_atomic(p, md.as_bytes()).other(),
        None => {
            print!("{md}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut cfg = PipelineConfig::default();
        let o = Overrides {
            tau: Some(0.05),
            variant: Some("pct".into()),
            percentile: Some(30.0),
            ..Overrides::default()
        };
        apply_overrides(&mut cfg, &o).unwrap();
        assert_eq!(cfg.rp.tau, 0.05);
        assert_eq!(cfg.motion.variant, MotionVariant::Pct(30.0));

        let o = Overrides {
            percentile: Some(70.0),
            ..Overrides::default()
        };
        apply_overrides(&mut cfg, &o).unwrap();
        assert_eq!(cfg.motion.variant, MotionVariant::Pct(70.0));

        for bad in [
            Overrides { variant: Some("mean".into()), percentile: Some(10.0), ..Overrides::default() },
            Overrides { variant: Some("median".into()), ..Overrides::default() },
            Overrides { variant: Some("wpct".into()), percentile: Some(120.0), ..Overrides::default() },
            Overrides { sigma: Some(-1.0), ..Overrides::default() },
        ] {
            assert!(apply_overrides(&mut PipelineConfig::default(), &bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Config(anyhow!("x")).exit_code(), 2);
        assert_eq!(Failure::Degenerate(anyhow!("x")).exit_code(), 4);
        assert_eq!(Failure::Pairing(anyhow!("x")).exit_code(), 5);
        assert_eq!(Failure::Other(anyhow!("x")).exit_code(), 1);
    }
}
