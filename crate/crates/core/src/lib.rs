//! # emogap
//!
//! Tools for studying how well valence/arousal music emotion regressors
//! transfer between datasets.
//!
//! The crate covers the whole pipeline:
//!
//! - [`datasets`]: manifest ingestion, per-dataset label normalization into
//!   `[-1, 1]`, deterministic 8:1:1 splits and combined corpora.
//! - [`audio_features`]: constant-Q chromagrams, MFCCs, temporal differences,
//!   summary statistics and feature fusion.
//! - [`embedding_io`]: the `EMB1` container for precomputed embeddings.
//! - [`regressor`]: a two-hidden-layer MLP probe with dropout, trained with Adam.
//! - [`eval`]: R², cross-dataset grids and the combined-training experiment.
//! - [`gap_analysis`]: sliced Wasserstein distance, Jensen-Shannon divergence,
//!   k-means composition, t-SNE and inter-centroid statistics.
//!
//! ```text
//! manifest.csv + scale.json ─┐
//!                            ├─> labels ─┐
//! audio / EMB1 features ─────┘           ├─> MLP ─> R² grid
//!                                        └─> divergences, clusters, t-SNE
//! ```

// Parameter checks use `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio_features;
pub mod datasets;
pub mod embedding_io;
pub mod error;
pub mod eval;
pub mod gap_analysis;
pub mod reference;
pub mod regressor;

pub(crate) mod rng;

pub use audio_features::{AudioClip, FeatureGram, FeatureVector, GramKind, VectorKind};
pub use datasets::{
    AnnotationScale, ClipRecord, CombinedDataset, Dataset, DatasetId, LabeledClip,
    NormalizedLabel, Split, SplitAssignment,
};
pub use embedding_io::{EmbeddingTable, FeatureMatrix};
pub use error::{Error, Result};
pub use eval::{EvalResult, GridResult};
pub use regressor::{MlpParams, TrainConfig, TrainReport};
