//! One function per subcommand. Each writes its outputs into the locked run
//! directory and returns a JSON summary that ends up in `run.json`.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use emogap_core::audio_features::{extract_from_file, HandcraftedKind};
use emogap_core::datasets::{clip_seed, make_record_splits, namespaced_id, record_genre_histogram, split_sizes};
use emogap_core::embedding_io::write_emb1;
use emogap_core::eval::{self, cross_grid, final_experiment, FinalDataset, GridDataset, COMBINED_MEMBERS, HELD_OUT};
use emogap_core::gap_analysis::{centroid_stats, cluster_report, divergence_matrix, inter_centroid_stats, project, DivergenceInput};
use emogap_core::regressor::save_checkpoint;
use emogap_core::{Dataset, DatasetId, EmbeddingTable, Split};
use ndarray::{concatenate, Array2, Axis};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{CentroidSpace, ClusterMode, DatasetEntry, ExperimentConfig};
use crate::data::{check_files, load_dataset, LoadedDataset};
use crate::error::{CliError, Result};
use crate::output::OutputDir;
use crate::svg;

fn write_csv_labels(ds: &Dataset, splits: &emogap_core::SplitAssignment) -> String {
    let mut out = String::from("clip_id,valence,arousal,split\n");
    for c in ds.normalized() {
        let split = match splits.get(&c.clip_id) {
            Some(Split::Train) => "train",
            Some(Split::Val) => "val",
            Some(Split::Test) => "test",
            None => "",
        };
        out.push_str(&format!("{},{},{},{split}\n", c.clip_id, c.label.valence, c.label.arousal));
    }
    out
}

fn ingest_one(ds: &Dataset, seed: u64, out: &mut OutputDir) -> Result<Value> {
    let splits = make_record_splits(&ds.records, seed)?;
    let labels = ds.normalized();
    let range = |f: &dyn Fn(&emogap_core::LabeledClip) -> f64| {
        labels.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (train, val, test) = split_sizes(ds.records.len());
    let summary = json!({
        "dataset_id": ds.id,
        "full_name": ds.id.full_name(),
        "n_clips": ds.records.len(),
        "scale": ds.scale,
        "splits": { "train": train, "val": val, "test": test },
        "normalized_valence_range": range(&|c| c.label.valence),
        "normalized_arousal_range": range(&|c| c.label.arousal),
        "genres": record_genre_histogram(&ds.records),
    });
    out.write_json(&format!("ingest_{}.json", ds.id), &summary)?;
    out.write_json(&format!("splits_{}.json", ds.id), &splits)?;
    out.write(&format!("labels_{}.csv", ds.id), write_csv_labels(ds, &splits))?;
    Ok(summary)
}

/// Validates manifests and writes summaries, splits and normalized labels.
pub fn ingest(config: &ExperimentConfig, manifest: Option<&Path>, scale: Option<&Path>, out: &mut OutputDir) -> Result<Value> {
    match (manifest, scale) {
        (Some(m), Some(s)) => {
            for p in [m, s] {
                if !p.exists() {
                    return Err(CliError::MissingFile(p.to_path_buf()));
                }
            }
            let ds = Dataset::load(m, s)?;
            Ok(json!([ingest_one(&ds, config.seed, out)?]))
        }
        (None, None) => {
            config.require_datasets(1)?;
            let mut all = Vec::new();
            for entry in &config.datasets {
                check_files(entry, &[])?;
                let ds = crate::data::load_manifest(entry)?;
                all.push(ingest_one(&ds, config.seed, out)?);
            }
            Ok(Value::Array(all))
        }
        _ => Err(CliError::Config("--manifest and --scale must be given together".into())),
    }
}

pub fn kind_name(kind: HandcraftedKind) -> &'static str {
    match kind {
        HandcraftedKind::Chroma => "chroma",
        HandcraftedKind::Chroma72 => "chroma72",
        HandcraftedKind::Mfcc => "mfcc",
    }
}

/// Extracts a hand-crafted descriptor for every manifest clip into an EMB1 file.
pub fn features(
    config: &ExperimentConfig,
    entry: &DatasetEntry,
    kind: HandcraftedKind,
    output: Option<&Path>,
    out: &mut OutputDir,
) -> Result<Value> {
    check_files(entry, &[])?;
    let ds = Dataset::load(&entry.manifest, &entry.scale)?;
    let audio_root = entry.manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
    let rows = ds
        .records
        .par_iter()
        .map(|r| {
            let path = audio_root.join(&r.audio_path);
            if !path.exists() {
                return Err(CliError::MissingFile(path));
            }
            let v = extract_from_file(&path, kind, &config.feature_params, clip_seed(config.seed, &r.clip_id))
                .map_err(|source| CliError::Clip { clip: r.clip_id.clone(), source })?;
            Ok((r.clip_id.clone(), v.values.iter().map(|&x| x as f32).collect::<Vec<f32>>()))
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = rows.first().map_or(0, |(_, v)| v.len());
    let mut table = EmbeddingTable::new(kind_name(kind), 0, dim);
    for (id, v) in rows {
        table.push(id, v)?;
    }
    let (path, name) = match output {
        Some(p) => (p.to_path_buf(), p.display().to_string()),
        None => {
            let name = format!("{}.{}.emb1", ds.id, kind_name(kind));
            (out.path(&name), name)
        }
    };
    write_emb1(&table, &path)?;
    out.record(&name);
    Ok(json!({ "dataset_id": ds.id, "kind": kind_name(kind), "rows": table.len(), "dim": dim, "file": path }))
}

fn load_all(config: &ExperimentConfig, kinds: &[String]) -> Result<Vec<LoadedDataset>> {
    for entry in &config.datasets {
        check_files(entry, kinds)?;
    }
    config
        .datasets
        .iter()
        .map(|entry| load_dataset(entry, kinds, config.seed))
        .collect()
}

fn join_notes(datasets: &[LoadedDataset]) -> Value {
    json!(datasets.iter().map(|d| (d.name(), &d.join)).collect::<BTreeMap<_, _>>())
}

/// Trains one model on a dataset's train split and scores its test split.
pub fn train(config: &ExperimentConfig, dataset: Option<DatasetId>, out: &mut OutputDir) -> Result<Value> {
    config.require_datasets(1)?;
    let entry = match dataset {
        Some(id) => config.dataset(id)?,
        None => &config.datasets[0],
    };
    let ds = load_dataset(entry, &config.features, config.seed)?;
    let (params, report) = eval::fit(&ds.set, &ds.splits, &config.train_config())?;
    save_checkpoint(&params, out.path("model.mlp1"))?;
    out.record("model.mlp1");
    out.write_json("train_report.json", &report)?;
    let test = ds.set.subset(&ds.splits, Split::Test);
    let result = eval::evaluate(&params, test.x.view(), test.y.view())?;
    out.write_json("eval.json", &result)?;
    Ok(json!({ "dataset": ds.name(), "input_dim": ds.set.dim(), "best_epoch": report.best_epoch, "test": result, "join": ds.join }))
}

/// Cross-dataset grid over every configured dataset.
pub fn grid(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    config.require_datasets(1)?;
    let datasets = load_all(config, &config.features)?;
    let inputs: Vec<GridDataset> = datasets
        .iter()
        .map(|d| GridDataset {
            name: d.name(),
            data: d.set.clone(),
            splits: d.splits.clone(),
        })
        .collect();
    let result = cross_grid(&inputs, &config.train_config())?;
    out.write("grid.csv", result.to_csv())?;
    out.write("grid.txt", result.to_text_table())?;
    out.write_json("grid.json", &result)?;
    let failed = result.cells.iter().filter(|c| c.result().is_none()).count();
    Ok(json!({ "cells": result.cells.len(), "failed_cells": failed, "join": join_notes(&datasets) }))
}

/// Pairwise transport and JS divergences over features and annotations.
pub fn divergence(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    config.require_datasets(2)?;
    let datasets = load_all(config, &config.features)?;
    let inputs: Vec<DivergenceInput> = datasets
        .iter()
        .map(|d| DivergenceInput {
            name: d.name(),
            features: d.set.x.clone(),
            annotations: d.set.y.clone(),
        })
        .collect();
    let matrix = divergence_matrix(&inputs, &config.divergence_params())?;
    out.write("divergence.csv", matrix.to_table_csv())?;
    out.write("divergence_long.csv", matrix.to_long_csv())?;
    out.write_json("divergence.json", &matrix)?;
    Ok(json!({ "pairs": matrix.pairs.len(), "join": join_notes(&datasets) }))
}

struct Pooled {
    clip_ids: Vec<String>,
    datasets: Vec<String>,
    genres: Vec<Option<String>>,
    x: Array2<f64>,
}

fn pool(datasets: &[LoadedDataset]) -> Result<Pooled> {
    let views: Vec<_> = datasets.iter().map(|d| d.set.x.view()).collect();
    let dim = views[0].ncols();
    if let Some(v) = views.iter().find(|v| v.ncols() != dim) {
        return Err(emogap_core::Error::DimensionMismatch { expected: dim, got: v.ncols() }.into());
    }
    Ok(Pooled {
        clip_ids: datasets
            .iter()
            .flat_map(|d| d.clips.iter().map(move |c| namespaced_id(d.id, &c.clip_id)))
            .collect(),
        datasets: datasets.iter().flat_map(|d| d.dataset_labels()).collect(),
        genres: datasets.iter().flat_map(|d| d.genres()).collect(),
        x: concatenate(Axis(0), &views).expect("dims checked"),
    })
}

/// k-means over the pooled clips with per-cluster dataset/genre composition.
pub fn cluster(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    config.require_datasets(1)?;
    let runs: Vec<(String, Vec<String>)> = match config.analysis.cluster_mode {
        ClusterMode::Concatenated => vec![("clusters".into(), config.features.clone())],
        ClusterMode::Separate => config.features.iter().map(|k| (format!("clusters_{k}"), vec![k.clone()])).collect(),
    };
    let mut summary = Vec::new();
    for (stem, kinds) in runs {
        let datasets = load_all(config, &kinds)?;
        let pooled = pool(&datasets)?;
        let report = cluster_report(pooled.x.view(), &pooled.clip_ids, &pooled.datasets, &pooled.genres, config.analysis.k, config.seed)?;
        out.write_json(&format!("{stem}.json"), &report)?;
        out.write(&format!("{stem}.svg"), svg::composition(&report.clusters, &format!("k-means ({})", kinds.join("+"))))?;
        summary.push(json!({ "features": kinds, "inertia": report.inertia, "sizes": report.clusters.iter().map(|c| c.size).collect::<Vec<_>>() }));
    }
    Ok(Value::Array(summary))
}

/// t-SNE projection with per-dataset centroids and their distance statistics.
pub fn project_cmd(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    config.require_datasets(2)?;
    let datasets = load_all(config, &config.features)?;
    let pooled = pool(&datasets)?;
    let projection = project(pooled.x.view(), &pooled.clip_ids, &pooled.datasets, &config.tsne_params())?;
    let names: Vec<String> = datasets.iter().map(|d| d.name()).collect();
    let stats = match config.analysis.centroid_space {
        CentroidSpace::Projection => inter_centroid_stats(&projection)?,
        CentroidSpace::Raw => centroid_stats(pooled.x.view(), &pooled.datasets, &names)?,
    };
    let title = config.features.join("+");
    out.write("projection.csv", projection.to_csv())?;
    out.write("projection.svg", svg::scatter(&projection, &format!("t-SNE ({title})")))?;
    out.write_json("centroids.json", &json!({ "space": config.analysis.centroid_space, "stats": stats, "centroids": projection.centroids, "kl_initial": projection.kl_initial, "kl_final": projection.kl_final, "tsne": projection.params }))?;
    out.write("centroid_heatmap.svg", svg::heatmap(&stats, "Inter-centroid distance"))?;
    Ok(json!({ "points": projection.points.len(), "kl_final": projection.kl_final, "mean": stats.mean, "variance": stats.variance }))
}

/// The {embedding, embedding+chroma} × {EmoMusic, combined} comparison.
pub fn final_cmd(config: &ExperimentConfig, out: &mut OutputDir) -> Result<Value> {
    let emb = vec![config.final_experiment.embedding.clone()];
    let fused = vec![config.final_experiment.embedding.clone(), config.final_experiment.chroma.clone()];
    let ids: Vec<DatasetId> = COMBINED_MEMBERS.iter().chain(&HELD_OUT).copied().collect();
    // check every file before any heavy work so the first missing one is named
    for id in &ids {
        check_files(config.dataset(*id)?, &fused)?;
    }
    let mut inputs = HashMap::new();
    let mut joins = BTreeMap::new();
    for id in ids {
        let entry = config.dataset(id)?;
        let e = load_dataset(entry, &emb, config.seed)?;
        let f = load_dataset(entry, &fused, config.seed)?;
        // both feature sets must cover the same clips
        let shared: std::collections::HashSet<&str> = f.set.clip_ids.iter().map(String::as_str).collect();
        let rows: Vec<usize> = e.set.clip_ids.iter().enumerate().filter(|(_, c)| shared.contains(c.as_str())).map(|(i, _)| i).collect();
        let embedding = eval::LabeledSet::new(
            rows.iter().map(|&i| e.set.clip_ids[i].clone()).collect(),
            e.set.x.select(Axis(0), &rows),
            e.set.y.select(Axis(0), &rows),
        )?;
        joins.insert(id.to_string(), f.join.clone());
        inputs.insert(
            id,
            FinalDataset {
                embedding,
                fused: f.set,
                splits: f.splits,
            },
        );
    }
    let report = final_experiment(&inputs, &config.train_config())?;
    out.write("final.csv", report.to_csv())?;
    out.write("final.txt", report.to_text_table())?;
    out.write_json("final.json", &report)?;
    Ok(json!({ "rows": report.rows.len(), "join": joins }))
}

/// Resolves the dataset for `features`: explicit files win over the config.
pub fn features_entry(config: &ExperimentConfig, dataset: Option<DatasetId>, manifest: Option<PathBuf>, scale: Option<PathBuf>) -> Result<DatasetEntry> {
    match (manifest, scale) {
        (Some(manifest), Some(scale)) => {
            if !scale.exists() {
                return Err(CliError::MissingFile(scale));
            }
            let sidecar = emogap_core::datasets::ScaleSidecar::load(&scale)?;
            Ok(DatasetEntry {
                id: sidecar.dataset_id,
                manifest,
                scale,
                features: BTreeMap::new(),
            })
        }
        (None, None) => {
            let id = dataset.ok_or_else(|| CliError::Config("give --dataset, or --manifest and --scale".into()))?;
            Ok(config.dataset(id)?.clone())
        }
        _ => Err(CliError::Config("--manifest and --scale must be given together".into())),
    }
}
