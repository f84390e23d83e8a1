use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "restphase", version, about = "Resting-phase detection for cardiac cine series")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic phantom or cohort with ground truth.
    Phantom(PhantomArgs),
    /// Detect resting phases in one series, or in every member of a cohort.
    Run(RunArgs),
    /// Sweep the threshold over a cohort with ground truth.
    Calibrate(CalibrateArgs),
    /// Compare predicted resting phases against references.
    Evaluate(EvaluateArgs),
    /// Summarize calibration and evaluation outputs as Markdown.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// JSON configuration; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for the phantom noise, or for the cohort draw.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generate this many members in numbered subdirectories.
    #[arg(long)]
    pub cohort: Option<usize>,
}

/// Overrides of configured motion and classification parameters.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Resting threshold on the motion value.
    #[arg(long)]
    pub tau: Option<f64>,
    /// dist, pct, mean, wpct or wmean; `wpct(30)` is also accepted.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub percentile: Option<f64>,
    /// Gaussian weighting width in pixels.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "alpha-ms")]
    pub alpha_ms: Option<f64>,
    #[arg(long = "omega-ms")]
    pub omega_ms: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Series directory, or a cohort directory of numbered members.
    #[arg(long)]
    pub series: PathBuf,
    /// JSON configuration; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Landmark file; defaults to annotation.json next to the series.
    #[arg(long)]
    pub annotation: Option<PathBuf>,
    /// Landmark column in frame 0.
    #[arg(long, requires = "y")]
    pub x: Option<f64>,
    /// Landmark row in frame 0.
    #[arg(long, requires = "x")]
    pub y: Option<f64>,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Also write every deformation field.
    #[arg(long)]
    pub emit_fields: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub cohort: PathBuf,
    /// JSON configuration; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Also compare all motion variants.
    #[arg(long)]
    pub variant_sweep: bool,
    /// Write SVG plots.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory with rp.json, or numbered member directories holding one.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory with truth_rp.json or rp.json, laid out like `--pred`.
    #[arg(long)]
    pub reference: PathBuf,
    /// JSON configuration; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "alpha-ms")]
    pub alpha_ms: Option<f64>,
    #[arg(long = "omega-ms")]
    pub omega_ms: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long)]
    pub evaluation: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
