//! Run configuration: one JSON document drives the whole pipeline.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::Aggregation;
use crate::error::{Result, SpurankError};
use crate::linear::TrainConfig;
use crate::ranking::Strategy;
use crate::seeding::sha256_hex;
use crate::synthetic::SyntheticConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    /// Generate the fixture dataset under the output directory.
    Synthetic {
        #[serde(flatten)]
        config: SyntheticConfig,
    },
    /// Use an existing manifest file.
    Manifest { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DetectorChoice {
    Mock,
    /// Line-delimited JSON subprocess; see the adapter protocol in README.
    Process {
        command: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        backend_id: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackboneChoice {
    Mock,
    Process {
        command: String,
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        backbone_id: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    /// Deepest rank slice evaluated on the validation split.
    pub i_max: usize,
    pub alphas: Vec<f64>,
    pub regions: Vec<crate::perturb::Region>,
    /// None uses the identity mapping over the manifest's class table.
    pub ood_mapping: Option<PathBuf>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            i_max: 50,
            alphas: vec![10.0, 100.0, 250.0],
            regions: vec![crate::perturb::Region::Fg, crate::perturb::Region::Bg],
            ood_mapping: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub source: DataSource,
    pub detector: DetectorChoice,
    pub backbone: BackboneChoice,
    /// Detector prompt; `{class_name}` is substituted per class.
    pub template: String,
    pub aggregation: Aggregation,
    pub strategies: Vec<Strategy>,
    pub k_values: Vec<usize>,
    pub train: TrainConfig,
    pub eval: EvalOptions,
    /// Master seed for subset draws and noise fields.
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Swap the top/bot labels in emitted reports (selection is unchanged).
    pub invert_naming: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            source: DataSource::Synthetic {
                config: SyntheticConfig::default(),
            },
            detector: DetectorChoice::Mock,
            backbone: BackboneChoice::Mock,
            template: "a photo of a {class_name}".to_string(),
            aggregation: Aggregation::Max,
            strategies: Strategy::ALL.to_vec(),
            k_values: vec![50, 100, 200],
            train: TrainConfig::default(),
            eval: EvalOptions::default(),
            seed: 0,
            output_dir: PathBuf::from("spurank-out"),
            invert_naming: false,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SpurankError::io(path, e))?;
        let config: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| SpurankError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(SpurankError::Config("strategies must not be empty".into()));
        }
        if self.k_values.is_empty() || self.k_values.iter().any(|&k| k < 1) {
            return Err(SpurankError::Config("k_values must be >= 1".into()));
        }
        if self.template.is_empty() {
            return Err(SpurankError::Config("template must not be empty".into()));
        }
        if self.eval.i_max < 1 {
            return Err(SpurankError::Config("eval.i_max must be >= 1".into()));
        }
        if self.eval.alphas.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(SpurankError::Config(
                "eval.alphas must be finite and > 0".into(),
            ));
        }
        if let DataSource::Synthetic { config } = &self.source {
            config.validate()?;
        }
        if let BackboneChoice::Process { dim, .. } = &self.backbone {
            if *dim < 1 {
                return Err(SpurankError::Config("backbone dim must be >= 1".into()));
            }
        }
        self.train.validate()?;
        Ok(())
    }

    /// Content hash of the config with its location-dependent field blanked,
    /// so runs into different directories fingerprint identically.
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        sha256_hex(
            serde_json::to_string(&canonical)
                .expect("config serializes")
                .as_bytes(),
        )
    }
}
