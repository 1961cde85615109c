//! Loading configured datasets and their feature files.

use std::collections::HashSet;

use emogap_core::datasets::make_record_splits;
use emogap_core::embedding_io::read_emb1;
use emogap_core::eval::LabeledSet;
use emogap_core::{Dataset, DatasetId, FeatureMatrix, LabeledClip, SplitAssignment, VectorKind};
use serde::Serialize;

use crate::config::DatasetEntry;
use crate::error::{CliError, Result};

/// Clip counts from joining a manifest with its feature files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct JoinSummary {
    pub manifest_clips: usize,
    pub matched: usize,
    /// Manifest clips absent from at least one feature file; left out.
    pub missing_features: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub id: DatasetId,
    /// Clips with features, in manifest order; aligned with `set`.
    pub clips: Vec<LabeledClip>,
    pub set: LabeledSet,
    /// Splits over every manifest clip, so they do not depend on which
    /// feature files are present.
    pub splits: SplitAssignment,
    pub join: JoinSummary,
}

impl LoadedDataset {
    pub fn name(&self) -> String {
        self.id.to_string()
    }

    pub fn dataset_labels(&self) -> Vec<String> {
        vec![self.name(); self.clips.len()]
    }

    pub fn genres(&self) -> Vec<Option<String>> {
        self.clips.iter().map(|c| c.genre.clone()).collect()
    }
}

fn vector_kind(name: &str) -> VectorKind {
    if name.starts_with("chroma") {
        VectorKind::ChromaStat
    } else if name.starts_with("mfcc") {
        VectorKind::MfccStat
    } else {
        VectorKind::Embedding
    }
}

/// Fails with the first referenced file that does not exist.
pub fn check_files(entry: &DatasetEntry, kinds: &[String]) -> Result<()> {
    for p in [&entry.manifest, &entry.scale] {
        if !p.exists() {
            return Err(CliError::MissingFile(p.clone()));
        }
    }
    for kind in kinds {
        let path = entry
            .features
            .get(kind)
            .ok_or_else(|| CliError::Config(format!("dataset {} has no {kind:?} feature file", entry.id)))?;
        if !path.exists() {
            return Err(CliError::MissingFile(path.clone()));
        }
    }
    Ok(())
}

pub fn load_manifest(entry: &DatasetEntry) -> Result<Dataset> {
    let ds = Dataset::load(&entry.manifest, &entry.scale)?;
    if ds.id != entry.id {
        return Err(CliError::Config(format!(
            "{} declares dataset {} but the config lists it as {}",
            entry.scale.display(),
            ds.id,
            entry.id
        )));
    }
    Ok(ds)
}

/// Feature kinds concatenated column-wise, rows matched by clip id.
pub fn load_features(entry: &DatasetEntry, kinds: &[String]) -> Result<FeatureMatrix> {
    let mut combined: Option<FeatureMatrix> = None;
    for kind in kinds {
        let path = entry
            .features
            .get(kind)
            .ok_or_else(|| CliError::Config(format!("dataset {} has no {kind:?} feature file", entry.id)))?;
        let m = read_emb1(path)?.to_matrix(vector_kind(kind));
        combined = Some(match combined {
            None => m,
            Some(prev) => {
                // keep only clips present in both files
                let here: HashSet<&str> = m.clip_ids.iter().map(String::as_str).collect();
                let shared: Vec<&str> = prev.clip_ids.iter().map(String::as_str).filter(|id| here.contains(id)).collect();
                prev.select(&shared)?.concat(&m)?
            }
        });
    }
    combined.ok_or_else(|| CliError::Config("no feature kinds selected".into()))
}

/// Manifest, normalized labels, splits and the selected features.
pub fn load_dataset(entry: &DatasetEntry, kinds: &[String], seed: u64) -> Result<LoadedDataset> {
    check_files(entry, kinds)?;
    let ds = load_manifest(entry)?;
    let splits = make_record_splits(&ds.records, seed)?;
    let features = load_features(entry, kinds)?;
    let available: HashSet<&str> = features.clip_ids.iter().map(String::as_str).collect();
    let all = ds.normalized();
    let (clips, missing): (Vec<LabeledClip>, Vec<LabeledClip>) =
        all.into_iter().partition(|c| available.contains(c.clip_id.as_str()));
    if clips.is_empty() {
        return Err(emogap_core::Error::NoOverlap.into());
    }
    let set = LabeledSet::from_clips(&features, &clips)?;
    Ok(LoadedDataset {
        id: ds.id,
        join: JoinSummary {
            manifest_clips: ds.records.len(),
            matched: clips.len(),
            missing_features: missing.into_iter().map(|c| c.clip_id).collect(),
        },
        clips,
        set,
        splits,
    })
}
