//! The `EMB1` container for per-clip feature vectors.
//!
//! Layout (little-endian, no padding):
//!
//! ```text
//! "EMB1" | version u32 | dim u32 | count u32 | model_id (u32 len + UTF-8) | layer u32
//! count × [ clip_id (u32 len + UTF-8) | dim × f32 ]
//! ```
//!
//! Precomputed foundation-model embeddings and the hand-crafted descriptors
//! both travel in this format, so every feature kind loads the same way.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};

use crate::audio_features::{FeatureVector, VectorKind};
use crate::datasets::{LabeledClip, NormalizedLabel};
use crate::error::{Error, Result};

pub const EMB1_MAGIC: [u8; 4] = *b"EMB1";
pub const EMB1_VERSION: u32 = 1;

/// Named per-clip vectors of one model layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub model_id: String,
    pub layer: u32,
    pub dim: usize,
    /// `(clip_id, values)` in file order.
    pub rows: Vec<(String, Vec<f32>)>,
}

impl EmbeddingTable {
    pub fn new(model_id: impl Into<String>, layer: u32, dim: usize) -> Self {
        Self {
            model_id: model_id.into(),
            layer,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, clip_id: impl Into<String>, values: Vec<f32>) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: values.len(),
            });
        }
        self.rows.push((clip_id.into(), values));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (id, v) in &self.rows {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("clip {id:?} contains {x}")));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateClip(id.clone()));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let dim = u32::try_from(self.dim).map_err(|_| Error::InvalidParameter("dim exceeds u32".into()))?;
        let count = u32::try_from(self.rows.len()).map_err(|_| Error::InvalidParameter("row count exceeds u32".into()))?;
        let mut out = Vec::with_capacity(24 + self.model_id.len() + self.rows.len() * (8 + 4 * self.dim));
        out.extend_from_slice(&EMB1_MAGIC);
        for v in [EMB1_VERSION, dim, count] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        put_str(&mut out, &self.model_id)?;
        out.extend_from_slice(&self.layer.to_le_bytes());
        for (id, values) in &self.rows {
            put_str(&mut out, id)?;
            for x in values {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader { bytes, pos: 0 };
        let magic: [u8; 4] = r.take(4, "magic")?.try_into().expect("4 bytes");
        if magic != EMB1_MAGIC {
            return Err(Error::BadMagic {
                expected: EMB1_MAGIC,
                found: magic,
            });
        }
        let version = r.u32("version")?;
        if version != EMB1_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let dim = r.u32("dim")? as usize;
        let count = r.u32("row count")? as usize;
        let model_id = r.string("model_id")?;
        let layer = r.u32("layer")?;

        // each row needs at least its length prefix and payload
        let min_row = 4 + 4 * dim;
        if (count as u128) * (min_row as u128) > r.remaining() as u128 {
            return Err(Error::Structure(format!(
                "header declares {count} rows of dim {dim}, but only {} payload bytes follow",
                r.remaining()
            )));
        }

        let mut table = EmbeddingTable::new(model_id, layer, dim);
        table.rows.reserve(count);
        for i in 0..count {
            let id = r.string("clip_id")?;
            let payload = r.take(4 * dim, "row values")?;
            let values: Vec<f32> = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            if let Some(x) = values.iter().find(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("row {i} ({id:?}) contains {x}")));
            }
            table.rows.push((id, values));
        }
        if r.remaining() != 0 {
            return Err(Error::Structure(format!("{} trailing bytes after {count} rows", r.remaining())));
        }
        table.validate()?;
        Ok(table)
    }

    /// All rows as an `f64` matrix.
    pub fn to_matrix(&self, kind: VectorKind) -> FeatureMatrix {
        let mut values = Array2::zeros((self.rows.len(), self.dim));
        for (mut dst, (_, src)) in values.axis_iter_mut(Axis(0)).zip(&self.rows) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = *s as f64;
            }
        }
        FeatureMatrix {
            kind,
            clip_ids: self.rows.iter().map(|(id, _)| id.clone()).collect(),
            values,
        }
    }

    /// Builds a table from a feature matrix, narrowing values to `f32`.
    pub fn from_matrix(model_id: impl Into<String>, layer: u32, m: &FeatureMatrix) -> Result<Self> {
        let mut t = EmbeddingTable::new(model_id, layer, m.dim());
        for (id, row) in m.clip_ids.iter().zip(m.values.axis_iter(Axis(0))) {
            t.push(id.clone(), row.iter().map(|&v| v as f32).collect())?;
        }
        t.validate()?;
        Ok(t)
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<()> {
    let len = u32::try_from(s.len()).map_err(|_| Error::InvalidParameter("string longer than u32".into()))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Structure(format!(
                "truncated {what}: need {n} bytes at offset {}, {} left",
                self.pos,
                self.remaining()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let raw = self.take(len, what)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Structure(format!("{what} is not valid UTF-8")))
    }
}

/// Writes a table; rejects non-finite values and ragged rows.
pub fn write_emb1(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = table.to_bytes()?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_emb1(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    EmbeddingTable::from_bytes(&bytes)
}

/// Mean over frames (rows) of a `frames × dim` matrix.
pub fn pool_time(frames: ArrayView2<f64>) -> Result<FeatureVector> {
    if frames.nrows() == 0 {
        return Err(Error::Empty("pool_time needs at least one frame"));
    }
    let mean = frames.mean_axis(Axis(0)).expect("non-empty");
    FeatureVector::new(mean.to_vec(), VectorKind::Embedding)
}

/// Row-per-clip feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub kind: VectorKind,
    pub clip_ids: Vec<String>,
    pub values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Rows in the order of `ids`; fails if any id is absent.
    pub fn select(&self, ids: &[&str]) -> Result<FeatureMatrix> {
        let index: HashMap<&str, usize> = self.clip_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let rows: Vec<usize> = ids
            .iter()
            .map(|id| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::MissingInputs(format!("no features for clip {id:?}")))
            })
            .collect::<Result<_>>()?;
        Ok(FeatureMatrix {
            kind: self.kind,
            clip_ids: ids.iter().map(|s| s.to_string()).collect(),
            values: self.values.select(Axis(0), &rows),
        })
    }

    /// Column-wise concatenation of rows with matching clip ids, `self` first.
    pub fn concat(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        let ids: Vec<&str> = self.clip_ids.iter().map(String::as_str).collect();
        let right = other.select(&ids)?;
        let values = ndarray::concatenate(Axis(1), &[self.values.view(), right.values.view()]).expect("row counts agree");
        Ok(FeatureMatrix {
            kind: VectorKind::Fused,
            clip_ids: self.clip_ids.clone(),
            values,
        })
    }

    /// Prefixes every clip id, e.g. with a dataset namespace.
    pub fn with_prefix(mut self, prefix: &str) -> Self {
        for id in &mut self.clip_ids {
            *id = format!("{prefix}{id}");
        }
        self
    }

    /// Stacks matrices vertically.
    pub fn vstack(parts: &[&FeatureMatrix]) -> Result<FeatureMatrix> {
        let first = parts.first().ok_or(Error::Empty("no matrices to stack"))?;
        for p in parts {
            if p.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    got: p.dim(),
                });
            }
        }
        let views: Vec<_> = parts.iter().map(|p| p.values.view()).collect();
        Ok(FeatureMatrix {
            kind: first.kind,
            clip_ids: parts.iter().flat_map(|p| p.clip_ids.iter().cloned()).collect(),
            values: ndarray::concatenate(Axis(0), &views).expect("dims checked"),
        })
    }
}

/// Clip ids present on only one side of a join.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JoinReport {
    pub matched: usize,
    pub only_in_table: Vec<String>,
    pub only_in_labels: Vec<String>,
}

/// Features and labels for clips present in both inputs, in label order.
pub fn join_with_labels(
    table: &EmbeddingTable,
    clips: &[LabeledClip],
) -> Result<(FeatureMatrix, Vec<NormalizedLabel>, JoinReport)> {
    let by_id: HashMap<&str, &[f32]> = table.rows.iter().map(|(id, v)| (id.as_str(), v.as_slice())).collect();
    let label_ids: HashSet<&str> = clips.iter().map(|c| c.clip_id.as_str()).collect();

    let matched: Vec<(&LabeledClip, &[f32])> = clips
        .iter()
        .filter_map(|c| by_id.get(c.clip_id.as_str()).map(|v| (c, *v)))
        .collect();
    if matched.is_empty() {
        return Err(Error::NoOverlap);
    }

    let mut values = Array2::zeros((matched.len(), table.dim));
    for (mut row, (_, v)) in values.axis_iter_mut(Axis(0)).zip(&matched) {
        for (d, s) in row.iter_mut().zip(v.iter()) {
            *d = *s as f64;
        }
    }
    let report = JoinReport {
        matched: matched.len(),
        only_in_table: table
            .rows
            .iter()
            .filter(|(id, _)| !label_ids.contains(id.as_str()))
            .map(|(id, _)| id.clone())
            .collect(),
        only_in_labels: clips
            .iter()
            .filter(|c| !by_id.contains_key(c.clip_id.as_str()))
            .map(|c| c.clip_id.clone())
            .collect(),
    };
    let kind = if table.model_id.starts_with("chroma") {
        VectorKind::ChromaStat
    } else if table.model_id.starts_with("mfcc") {
        VectorKind::MfccStat
    } else {
        VectorKind::Embedding
    };
    let matrix = FeatureMatrix {
        kind,
        clip_ids: matched.iter().map(|(c, _)| c.clip_id.clone()).collect(),
        values,
    };
    Ok((matrix, matched.iter().map(|(c, _)| c.label).collect(), report))
}
