//! Command-line front end for the `emogap` pipeline.
//!
//! Every subcommand reads a JSON experiment config, writes its artifacts into
//! one output directory (guarded by a `.lock` file), records a `run.json`
//! with the effective configuration and prints a one-line JSON summary.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use emogap_core::audio_features::HandcraftedKind;
use emogap_core::DatasetId;
use serde_json::{json, Value};

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod output;
pub mod svg;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};

use config::{CentroidSpace, ClusterMode, DEFAULT_OUT_DIR};
use output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "emogap", version, about = "Cross-dataset music emotion regression and distribution-gap analysis")]
pub struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed for every seeded step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureKind {
    /// 96-dim chroma statistics (three derivative orders).
    Chroma,
    /// 72-dim chroma statistics (two derivative orders).
    Chroma72,
    /// 160-dim MFCC statistics.
    Mfcc,
}

impl From<FeatureKind> for HandcraftedKind {
    fn from(k: FeatureKind) -> Self {
        match k {
            FeatureKind::Chroma => HandcraftedKind::Chroma,
            FeatureKind::Chroma72 => HandcraftedKind::Chroma72,
            FeatureKind::Mfcc => HandcraftedKind::Mfcc,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate manifests; write normalized labels, splits and summaries.
    Ingest {
        #[arg(long, requires = "scale")]
        manifest: Option<PathBuf>,
        #[arg(long, requires = "manifest")]
        scale: Option<PathBuf>,
    },
    /// Extract hand-crafted audio descriptors into an EMB1 file.
    Features {
        #[arg(long, value_enum)]
        kind: FeatureKind,
        #[arg(long)]
        dataset: Option<DatasetId>,
        #[arg(long, requires = "scale")]
        manifest: Option<PathBuf>,
        #[arg(long, requires = "manifest")]
        scale: Option<PathBuf>,
        /// Output file (default: <out-dir>/<ID>.<kind>.emb1).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train one regressor and score it on the dataset's test split.
    Train {
        #[arg(long)]
        dataset: Option<DatasetId>,
    },
    /// Train on each dataset and test on every dataset.
    Grid,
    /// Pairwise sliced Wasserstein and JS divergences.
    Divergence,
    /// k-means over pooled clips with composition per cluster.
    Cluster {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        cluster_mode: Option<ClusterMode>,
    },
    /// t-SNE projection and inter-centroid distances.
    Project {
        #[arg(long, value_enum)]
        centroid_space: Option<CentroidSpace>,
    },
    /// Embedding vs embedding+chroma, trained on EmoMusic vs the combined set.
    Final,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Features { .. } => "features",
            Command::Train { .. } => "train",
            Command::Grid => "grid",
            Command::Divergence => "divergence",
            Command::Cluster { .. } => "cluster",
            Command::Project { .. } => "project",
            Command::Final => "final",
        }
    }

    fn needs_config(&self) -> bool {
        !matches!(
            self,
            Command::Ingest { manifest: Some(_), .. } | Command::Features { manifest: Some(_), .. }
        )
    }
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if cli.command.needs_config() => {
            return Err(CliError::Config(format!("`{}` needs --config", cli.command.name())));
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out_dir {
        config.out_dir = Some(out.clone());
    }
    match &cli.command {
        Command::Cluster { k, cluster_mode } => {
            if let Some(k) = k {
                config.analysis.k = *k;
            }
            if let Some(mode) = cluster_mode {
                config.analysis.cluster_mode = *mode;
            }
        }
        Command::Project { centroid_space: Some(space) } => config.analysis.centroid_space = *space,
        _ => {}
    }
    config.validate()?;
    Ok(config)
}

/// Runs a parsed command; returns the JSON printed on success.
pub fn run(cli: Cli, argv: Vec<String>) -> Result<Value> {
    let config = effective_config(&cli)?;
    let root = config.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let mut out = OutputDir::acquire(&root)?;
    let summary = match &cli.command {
        Command::Ingest { manifest, scale } => commands::ingest(&config, manifest.as_deref(), scale.as_deref(), &mut out)?,
        Command::Features {
            kind,
            dataset,
            manifest,
            scale,
            output,
        } => {
            let entry = commands::features_entry(&config, *dataset, manifest.clone(), scale.clone())?;
            commands::features(&config, &entry, (*kind).into(), output.as_deref(), &mut out)?
        }
        Command::Train { dataset } => commands::train(&config, *dataset, &mut out)?,
        Command::Grid => commands::grid(&config, &mut out)?,
        Command::Divergence => commands::divergence(&config, &mut out)?,
        Command::Cluster { .. } => commands::cluster(&config, &mut out)?,
        Command::Project { .. } => commands::project_cmd(&config, &mut out)?,
        Command::Final => commands::final_cmd(&config, &mut out)?,
    };
    let outputs = out.written().to_vec();
    let record = json!({
        "tool": "emogap",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "args": argv,
        "seed": config.seed,
        "config": config,
        "outputs": outputs,
        "summary": summary,
    });
    out.write_json("run.json", &record)?;
    Ok(json!({
        "status": "ok",
        "command": cli.command.name(),
        "out_dir": out.root(),
        "outputs": out.written(),
        "summary": summary,
    }))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from_args<I, T>(args: I) -> Result<Value>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args).map_err(|e| CliError::Config(e.to_string()))?;
    run(cli, args.iter().map(|a| a.to_string_lossy().into_owned()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from(["emogap", "ingest", "--manifest", "m.csv", "--scale", "s.json", "--seed", "9", "--out-dir", "o"]).unwrap();
        let c = effective_config(&cli).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.out_dir, Some(PathBuf::from("o")));
    }

    #[test]
    fn analysis_commands_need_a_config() {
        let err = run_from_args(["emogap", "grid"]).unwrap_err();
        assert_eq!(err.kind(), "config");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_dataset_id_is_rejected() {
        assert!(Cli::try_parse_from(["emogap", "train", "--dataset", "X"]).is_err());
    }
}
