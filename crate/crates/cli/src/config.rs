//! The experiment configuration document.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "seed": 0,
//!   "out_dir": "out",
//!   "datasets": [
//!     { "id": "E", "manifest": "emomusic.csv", "scale": "emomusic.scale.json",
//!       "features": { "jukebox": "emomusic.jukebox.emb1", "chroma72": "emomusic.chroma72.emb1" } }
//!   ],
//!   "features": ["jukebox"],
//!   "train": { "learning_rate": 0.0001 },
//!   "analysis": { "k": 3 },
//!   "final": { "embedding": "jukebox", "chroma": "chroma72" }
//! }
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use emogap_core::audio_features::FeatureParams;
use emogap_core::gap_analysis::{DivergenceParams, TsneParams, DEFAULT_BINS, DEFAULT_PROJECTIONS};
use emogap_core::{DatasetId, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_OUT_DIR: &str = "emogap-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub id: DatasetId,
    pub manifest: PathBuf,
    pub scale: PathBuf,
    /// Feature kind name → EMB1 file.
    #[serde(default)]
    pub features: BTreeMap<String, PathBuf>,
}

/// Where inter-centroid distances are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CentroidSpace {
    Projection,
    Raw,
}

/// Whether clustering runs once on concatenated features or once per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ClusterMode {
    Concatenated,
    Separate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub k: usize,
    pub bins: usize,
    pub n_projections: usize,
    pub tsne: TsneParams,
    pub centroid_space: CentroidSpace,
    pub cluster_mode: ClusterMode,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            k: emogap_core::gap_analysis::kmeans::DEFAULT_K,
            bins: DEFAULT_BINS,
            n_projections: DEFAULT_PROJECTIONS,
            tsne: TsneParams::default(),
            centroid_space: CentroidSpace::Projection,
            cluster_mode: ClusterMode::Concatenated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinalConfig {
    pub embedding: String,
    pub chroma: String,
}

impl Default for FinalConfig {
    fn default() -> Self {
        Self {
            embedding: "jukebox".into(),
            chroma: "chroma72".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub datasets: Vec<DatasetEntry>,
    /// Feature kinds concatenated (in order) as model input.
    #[serde(default = "default_features")]
    pub features: Vec<String>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default, rename = "final")]
    pub final_experiment: FinalConfig,
    #[serde(default)]
    pub feature_params: FeatureParams,
}

fn default_features() -> Vec<String> {
    vec!["jukebox".into()]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            out_dir: None,
            datasets: Vec::new(),
            features: default_features(),
            train: TrainConfig::default(),
            analysis: AnalysisConfig::default(),
            final_experiment: FinalConfig::default(),
            feature_params: FeatureParams::default(),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(CliError::MissingFile(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(out) = &self.out_dir {
            self.out_dir = Some(resolve(base, out));
        }
        for d in &mut self.datasets {
            d.manifest = resolve(base, &d.manifest);
            d.scale = resolve(base, &d.scale);
            for p in d.features.values_mut() {
                *p = resolve(base, p);
            }
        }
    }

    /// Checks everything that does not need file access.
    pub fn validate(&self) -> Result<()> {
        self.train.validate().map_err(|e| CliError::Config(format!("train: {e}")))?;
        if self.features.is_empty() {
            return Err(CliError::Config("features must list at least one kind".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for d in &self.datasets {
            if !seen.insert(d.id) {
                return Err(CliError::Config(format!("dataset {} listed twice", d.id)));
            }
        }
        if self.analysis.k == 0 || self.analysis.bins == 0 || self.analysis.n_projections == 0 {
            return Err(CliError::Config("analysis: k, bins and n_projections must be positive".into()));
        }
        Ok(())
    }

    pub fn dataset(&self, id: DatasetId) -> Result<&DatasetEntry> {
        self.datasets
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| CliError::Config(format!("dataset {id} is not configured")))
    }

    pub fn require_datasets(&self, min: usize) -> Result<()> {
        if self.datasets.len() < min {
            return Err(CliError::Config(format!(
                "this command needs at least {min} dataset(s), {} configured",
                self.datasets.len()
            )));
        }
        Ok(())
    }

    /// The seed applied to every seeded step of a run.
    pub fn divergence_params(&self) -> DivergenceParams {
        DivergenceParams {
            n_projections: self.analysis.n_projections,
            bins: self.analysis.bins,
            seed: self.seed,
        }
    }

    pub fn tsne_params(&self) -> TsneParams {
        TsneParams {
            seed: self.seed,
            ..self.analysis.tsne
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }
}
