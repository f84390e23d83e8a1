//! JSON configuration shared by all subcommands.

use std::path::Path;

use anyhow::{ensure, Result};
use serde::{Deserialize, Serialize};

use restphase_core::calibration::AgreementParams;
use restphase_core::motion::MotionVariant;
use restphase_core::phantom::{CohortRanges, PhantomConfig};
use restphase_core::pipeline::PipelineConfig;

use crate::formats::{read_json, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub phantom: PhantomConfig,
    pub cohort: CohortConfig,
    pub pipeline: PipelineConfig,
    pub calibration: CalibrationConfig,
    pub evaluation: AgreementParams,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            phantom: PhantomConfig::default(),
            cohort: CohortConfig::default(),
            pipeline: PipelineConfig::default(),
            calibration: CalibrationConfig::default(),
            evaluation: AgreementParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortConfig {
    /// Number of members; absent for a single phantom.
    pub size: Option<usize>,
    pub ranges: CohortRanges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    pub variant_sweep: bool,
    pub variants: Vec<MotionVariant>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            variant_sweep: false,
            variants: MotionVariant::comparison_grid(),
        }
    }
}

impl Config {
    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let cfg: Config = read_json(path)?;
        ensure!(
            cfg.schema_version == SCHEMA_VERSION,
            "{}: schema_version {} is not supported",
            path.display(),
            cfg.schema_version
        );
        Ok(cfg)
    }
}
