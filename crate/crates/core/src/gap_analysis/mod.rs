//! Distribution-gap diagnostics between datasets: transport distance and JS
//! divergence over features and annotations, k-means composition, t-SNE
//! projections and inter-centroid spread.

pub mod js;
pub mod kmeans;
pub mod transport;
pub mod tsne;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use js::{js_divergence, js_from_histograms, DEFAULT_BINS};
pub use kmeans::{adjusted_rand_index, cluster_composition, cluster_report, kmeans, ClusterComposition, ClusterReport, KMeansResult};
pub use transport::{exact_w1, sliced_wasserstein, sliced_wasserstein_raw, w1_1d, DEFAULT_PROJECTIONS};
pub use tsne::{silhouette_score, tsne, TsneOutput, TsneParams};

/// Transport distance and JS divergence over feature vectors ("data") and
/// normalized `(valence, arousal)` points ("annot").
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergencePair {
    pub wd_data: f64,
    pub js_data: f64,
    pub wd_annot: f64,
    pub js_annot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DivergenceParams {
    pub n_projections: usize,
    pub bins: usize,
    pub seed: u64,
}

impl Default for DivergenceParams {
    fn default() -> Self {
        Self {
            n_projections: DEFAULT_PROJECTIONS,
            bins: DEFAULT_BINS,
            seed: 0,
        }
    }
}

/// Features and annotations of one dataset.
#[derive(Debug, Clone)]
pub struct DivergenceInput {
    pub name: String,
    pub features: Array2<f64>,
    /// `n × 2` normalized `(valence, arousal)`.
    pub annotations: Array2<f64>,
}

pub fn divergence_pair(a: &DivergenceInput, b: &DivergenceInput, params: &DivergenceParams) -> Result<DivergencePair> {
    for d in [a, b] {
        if d.annotations.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: d.annotations.ncols(),
            });
        }
    }
    let (fa, fb) = (a.features.view(), b.features.view());
    let (la, lb) = (a.annotations.view(), b.annotations.view());
    Ok(DivergencePair {
        wd_data: sliced_wasserstein(fa, fb, params.n_projections, params.seed)?,
        js_data: js_divergence(fa, fb, params.bins)?,
        wd_annot: sliced_wasserstein(la, lb, params.n_projections, params.seed)?,
        js_annot: js_divergence(la, lb, params.bins)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    /// Row dataset (later in input order).
    pub row: String,
    /// Column dataset (earlier in input order).
    pub col: String,
    #[serde(flatten)]
    pub divergence: DivergencePair,
}

/// Lower-triangular matrix of pairwise divergences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceMatrix {
    pub names: Vec<String>,
    pub params: DivergenceParams,
    pub pairs: Vec<PairEntry>,
}

impl DivergenceMatrix {
    /// Looks up a pair in either order.
    pub fn get(&self, a: &str, b: &str) -> Option<&DivergencePair> {
        self.pairs
            .iter()
            .find(|p| (p.row == a && p.col == b) || (p.row == b && p.col == a))
            .map(|p| &p.divergence)
    }

    /// One row per dataset, two columns (Data, Annot.) per dataset, entries
    /// `WD/JS`; the diagonal and upper triangle are `-`.
    pub fn to_table_csv(&self) -> String {
        let mut out = String::from("dataset");
        for n in &self.names {
            let _ = write!(out, ",{n}_data,{n}_annot");
        }
        out.push('\n');
        for (i, row) in self.names.iter().enumerate() {
            out.push_str(row);
            for (j, col) in self.names.iter().enumerate() {
                match (j < i).then(|| self.get(row, col)).flatten() {
                    Some(d) => {
                        let _ = write!(out, ",{:.2}/{:.2},{:.2}/{:.2}", d.wd_data, d.js_data, d.wd_annot, d.js_annot);
                    }
                    None => out.push_str(",-,-"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// `row,col,wd_data,js_data,wd_annot,js_annot` at full precision.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("row,col,wd_data,js_data,wd_annot,js_annot\n");
        for p in &self.pairs {
            let d = &p.divergence;
            let _ = writeln!(out, "{},{},{},{},{},{}", p.row, p.col, d.wd_data, d.js_data, d.wd_annot, d.js_annot);
        }
        out
    }
}

/// Divergences for every unordered pair, computed in parallel.
pub fn divergence_matrix(datasets: &[DivergenceInput], params: &DivergenceParams) -> Result<DivergenceMatrix> {
    if datasets.len() < 2 {
        return Err(Error::TooFewRecords {
            needed: 2,
            got: datasets.len(),
        });
    }
    let index: Vec<(usize, usize)> = (0..datasets.len()).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let pairs = index
        .par_iter()
        .map(|&(i, j)| {
            Ok(PairEntry {
                row: datasets[i].name.clone(),
                col: datasets[j].name.clone(),
                divergence: divergence_pair(&datasets[i], &datasets[j], params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DivergenceMatrix {
        names: datasets.iter().map(|d| d.name.clone()).collect(),
        params: *params,
        pairs,
    })
}

/// Per-group means of the rows of `points`, in first-appearance order.
pub fn group_centroids(points: ArrayView2<f64>, labels: &[String]) -> Result<Vec<(String, Vec<f64>)>> {
    if labels.len() != points.nrows() {
        return Err(Error::LengthMismatch {
            left: points.nrows(),
            right: labels.len(),
        });
    }
    let mut order: Vec<String> = Vec::new();
    let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    for (row, label) in points.rows().into_iter().zip(labels) {
        let entry = sums.entry(label).or_insert_with(|| {
            order.push(label.clone());
            (vec![0.0; points.ncols()], 0)
        });
        for (s, v) in entry.0.iter_mut().zip(row) {
            *s += v;
        }
        entry.1 += 1;
    }
    Ok(order
        .into_iter()
        .map(|name| {
            let (sum, count) = &sums[name.as_str()];
            let mean = sum.iter().map(|s| s / *count as f64).collect();
            (name, mean)
        })
        .collect())
}

/// A 2-D embedding of labeled clips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub clip_ids: Vec<String>,
    pub labels: Vec<String>,
    pub points: Vec<[f64; 2]>,
    /// Per-label mean point, in first-appearance order.
    pub centroids: Vec<(String, [f64; 2])>,
    pub kl_initial: f64,
    pub kl_final: f64,
    pub params: TsneParams,
}

impl Projection2D {
    pub fn points_array(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.points.len(), 2), |(i, j)| self.points[i][j])
    }

    /// `x,y,dataset,clip_id`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,dataset,clip_id\n");
        for ((p, label), id) in self.points.iter().zip(&self.labels).zip(&self.clip_ids) {
            let _ = writeln!(out, "{},{},{label},{id}", p[0], p[1]);
        }
        out
    }
}

/// Runs t-SNE and attaches labels and per-label centroids.
pub fn project(x: ArrayView2<f64>, clip_ids: &[String], labels: &[String], params: &TsneParams) -> Result<Projection2D> {
    for len in [clip_ids.len(), labels.len()] {
        if len != x.nrows() {
            return Err(Error::LengthMismatch { left: x.nrows(), right: len });
        }
    }
    let out = tsne(x, params)?;
    let centroids = group_centroids(out.points.view(), labels)?
        .into_iter()
        .map(|(name, c)| (name, [c[0], c[1]]))
        .collect();
    Ok(Projection2D {
        clip_ids: clip_ids.to_vec(),
        labels: labels.to_vec(),
        points: out.points.rows().into_iter().map(|r| [r[0], r[1]]).collect(),
        centroids,
        kl_initial: out.kl_initial,
        kl_final: out.kl_final,
        params: TsneParams {
            learning_rate: Some(out.learning_rate),
            ..*params
        },
    })
}

/// Pairwise distances between group centroids with their mean and
/// population variance over unordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidStats {
    pub names: Vec<String>,
    pub distances: Vec<Vec<f64>>,
    pub mean: f64,
    pub variance: f64,
}

fn stats_from_centroids(centroids: &[(String, Vec<f64>)]) -> Result<CentroidStats> {
    let k = centroids.len();
    if k < 2 {
        return Err(Error::TooFewRecords { needed: 2, got: k });
    }
    let mut distances = vec![vec![0.0; k]; k];
    let mut upper = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let d = centroids[i]
                .1
                .iter()
                .zip(&centroids[j].1)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            distances[i][j] = d;
            distances[j][i] = d;
            upper.push(d);
        }
    }
    let mean = upper.iter().sum::<f64>() / upper.len() as f64;
    let variance = upper.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / upper.len() as f64;
    Ok(CentroidStats {
        names: centroids.iter().map(|(n, _)| n.clone()).collect(),
        distances,
        mean,
        variance,
    })
}

/// Centroid statistics for the named groups, in the given order, over points
/// of any dimension. A named group without points is an error.
pub fn centroid_stats(points: ArrayView2<f64>, labels: &[String], names: &[String]) -> Result<CentroidStats> {
    let found = group_centroids(points, labels)?;
    let ordered = names
        .iter()
        .map(|n| {
            found
                .iter()
                .find(|(name, _)| name == n)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("dataset {n:?} has no points")))
        })
        .collect::<Result<Vec<_>>>()?;
    stats_from_centroids(&ordered)
}

/// Centroid statistics in the projected plane.
pub fn inter_centroid_stats(projection: &Projection2D) -> Result<CentroidStats> {
    let centroids: Vec<(String, Vec<f64>)> = projection.centroids.iter().map(|(n, c)| (n.clone(), c.to_vec())).collect();
    stats_from_centroids(&centroids)
}
