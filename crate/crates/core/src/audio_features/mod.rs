//! Hand-crafted audio descriptors.
//!
//! Audio is analysed mono at 22,050 Hz. A fixed-length segment is cut (or
//! zero padded) from each clip, turned into a chromagram or MFCC matrix, and
//! summarized into a fixed-size vector of per-band means and standard
//! deviations over the value and its temporal differences.

mod chroma;
mod mfcc;
mod stats;
mod wav;

pub use chroma::{compute_chromagram, ChromaParams, PITCH_CLASSES};
pub use mfcc::{compute_mfcc, mel_filterbank, MfccParams};
pub use stats::{concat_features, stack_derivatives, summarize_stats};
pub use wav::{load_wav, resample};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analysis sample rate.
pub const TARGET_SAMPLE_RATE: u32 = 22_050;
/// Segment length cut from each clip.
pub const SEGMENT_SECONDS: f64 = 25.0;

/// Mono PCM samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Audio("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::Audio("no samples".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramKind {
    Chroma,
    Mfcc,
}

/// A time-frequency feature matrix, bands × frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGram {
    pub values: ndarray::Array2<f64>,
    pub kind: GramKind,
    pub hop_s: f64,
}

impl FeatureGram {
    pub fn n_bands(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_frames(&self) -> usize {
        self.values.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorKind {
    ChromaStat,
    MfccStat,
    Embedding,
    Fused,
}

/// Fixed-size per-clip descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub kind: VectorKind,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, kind: VectorKind) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("feature entry {i} is {}", values[i])));
        }
        Ok(Self { values, kind })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Cuts a `target_s` window at a seeded uniform offset, or zero pads the tail
/// of shorter clips.
pub fn select_segment(clip: &AudioClip, target_s: f64, seed: u64) -> Result<AudioClip> {
    if !(target_s > 0.0 && target_s.is_finite()) {
        return Err(Error::InvalidParameter(format!("segment length {target_s}")));
    }
    let target = (target_s * clip.sample_rate as f64).round() as usize;
    let n = clip.samples.len();
    let samples = if n >= target {
        let start = crate::rng::seeded(seed, 0x5e6).random_range(0..=n - target);
        clip.samples[start..start + target].to_vec()
    } else {
        let mut s = clip.samples.clone();
        s.resize(target, 0.0);
        s
    };
    Ok(AudioClip {
        samples,
        sample_rate: clip.sample_rate,
    })
}

/// Start offset (in samples) that [`select_segment`] uses for a clip of
/// `n_samples`; `None` when the clip is padded instead.
pub fn segment_start(n_samples: usize, sample_rate: u32, target_s: f64, seed: u64) -> Option<usize> {
    let target = (target_s * sample_rate as f64).round() as usize;
    (n_samples >= target).then(|| crate::rng::seeded(seed, 0x5e6).random_range(0..=n_samples - target))
}

/// Which hand-crafted descriptor to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandcraftedKind {
    /// Chroma statistics over value and three difference orders (96 dims).
    Chroma,
    /// Chroma statistics over value and two difference orders (72 dims), used for fusion.
    Chroma72,
    /// MFCC statistics over value and three difference orders.
    Mfcc,
}

/// Parameters of the full clip-to-vector pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureParams {
    pub segment_s: f64,
    pub chroma: ChromaParams,
    pub mfcc: MfccParams,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            segment_s: SEGMENT_SECONDS,
            chroma: ChromaParams::default(),
            mfcc: MfccParams::default(),
        }
    }
}

/// Segment, analyse and summarize one clip already at the analysis rate.
pub fn extract_handcrafted(clip: &AudioClip, kind: HandcraftedKind, params: &FeatureParams, seed: u64) -> Result<FeatureVector> {
    let segment = select_segment(clip, params.segment_s, seed)?;
    match kind {
        HandcraftedKind::Chroma => summarize_stats(&compute_chromagram(&segment, &params.chroma)?, 3),
        HandcraftedKind::Chroma72 => summarize_stats(&compute_chromagram(&segment, &params.chroma)?, 2),
        HandcraftedKind::Mfcc => summarize_stats(&compute_mfcc(&segment, &params.mfcc)?, 3),
    }
}

/// Loads a WAV file, downmixes, resamples to the analysis rate and extracts
/// the descriptor.
pub fn extract_from_file(path: impl AsRef<std::path::Path>, kind: HandcraftedKind, params: &FeatureParams, seed: u64) -> Result<FeatureVector> {
    let clip = load_wav(path)?;
    let clip = resample(&clip, TARGET_SAMPLE_RATE)?;
    extract_handcrafted(&clip, kind, params, seed)
}
