//! Synthetic datasets written to disk in the formats the CLI reads.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use emogap_core::embedding_io::write_emb1;
use emogap_core::{DatasetId, EmbeddingTable};
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;

/// A label mechanism: `y = tanh(W x / sqrt(d))`, one column per axis.
#[derive(Debug, Clone)]
pub struct Mechanism {
    pub weights: Array2<f64>,
}

impl Mechanism {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            weights: Array2::from_shape_fn((dim, 2), |_| StandardNormal.sample(&mut rng)),
        }
    }

    /// An independent draw made orthogonal to `self` on each axis, so its
    /// labels are uncorrelated with those of `self`.
    pub fn disjoint_from(&self, seed: u64) -> Self {
        let mut other = Self::new(self.weights.nrows(), seed);
        for a in 0..2 {
            let (u, v) = (self.weights.column(a).to_owned(), other.weights.column(a).to_owned());
            let proj = u.dot(&v) / u.dot(&u);
            other.weights.column_mut(a).assign(&(&v - &(&u * proj)));
        }
        other
    }

    pub fn labels(&self, x: &Array2<f64>) -> Array2<f64> {
        let scale = (x.ncols() as f64).sqrt();
        x.dot(&self.weights).mapv(|v| (1.5 * v / scale).tanh())
    }
}

/// `n` Gaussian feature rows around `shift`, labelled by `mechanism`.
pub fn sample(n: usize, shift: &Array1<f64>, mechanism: &Mechanism, seed: u64) -> (Array2<f64>, Array2<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = shift.len();
    let x = Array2::from_shape_fn((n, dim), |(_, j)| {
        let z: f64 = StandardNormal.sample(&mut rng);
        shift[j] + z
    });
    let y = mechanism.labels(&x);
    (x, y)
}

pub struct Written {
    pub id: DatasetId,
    pub manifest: PathBuf,
    pub scale: PathBuf,
    pub features: PathBuf,
}

/// Writes manifest, scale sidecar and a `jukebox` EMB1 file for one dataset.
///
/// Labels in `[-1, 1]` are stored on the raw scale `[lo, hi]`.
pub fn write_dataset(dir: &Path, id: DatasetId, x: &Array2<f64>, y: &Array2<f64>, (lo, hi): (f64, f64)) -> Written {
    let stem = id.as_str().to_lowercase();
    let manifest = dir.join(format!("{stem}.csv"));
    let scale = dir.join(format!("{stem}.scale.json"));
    let features = dir.join(format!("{stem}.jukebox.emb1"));
    let raw = |v: f64| lo + (v + 1.0) / 2.0 * (hi - lo);
    let genres = ["rock", "pop", "classical"];

    let mut csv = String::from("clip_id,audio_path,duration_s,valence,arousal,genre\n");
    let mut table = EmbeddingTable::new("synthetic", 0, x.ncols());
    for i in 0..x.nrows() {
        let clip = format!("{stem}{i:04}");
        let _ = writeln!(csv, "{clip},{clip}.wav,45,{},{},{}", raw(y[[i, 0]]), raw(y[[i, 1]]), genres[i % 3]);
        table.push(clip, x.row(i).iter().map(|&v| v as f32).collect()).unwrap();
    }
    std::fs::write(&manifest, csv).unwrap();
    std::fs::write(
        &scale,
        json!({ "dataset_id": id, "v_min": lo, "v_max": hi, "a_min": lo, "a_max": hi }).to_string(),
    )
    .unwrap();
    write_emb1(&table, &features).unwrap();
    Written { id, manifest, scale, features }
}

/// A config document listing the written datasets with paths relative to `dir`.
pub fn write_config(dir: &Path, datasets: &[&Written], extra: serde_json::Value) -> PathBuf {
    let rel = |p: &Path| p.file_name().unwrap().to_string_lossy().into_owned();
    let mut doc = json!({
        "schema_version": 1,
        "seed": 0,
        "datasets": datasets.iter().map(|d| json!({
            "id": d.id,
            "manifest": rel(&d.manifest),
            "scale": rel(&d.scale),
            "features": { "jukebox": rel(&d.features) },
        })).collect::<Vec<_>>(),
        "features": ["jukebox"],
    });
    if let (Some(base), Some(extra)) = (doc.as_object_mut(), extra.as_object()) {
        for (k, v) in extra {
            base.insert(k.clone(), v.clone());
        }
    }
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

/// A small, fast training setup for tests.
pub fn quick_train() -> serde_json::Value {
    json!({ "learning_rate": 0.001, "max_epochs": 60, "patience": 10, "hidden_units": [32, 16] })
}
