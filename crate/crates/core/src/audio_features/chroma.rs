use std::f64::consts::PI;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AudioClip, FeatureGram, GramKind};
use crate::error::{Error, Result};

pub const PITCH_CLASSES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

/// Constant-Q chromagram settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChromaParams {
    pub hop_length: usize,
    /// Lowest analysed frequency (C1).
    pub fmin: f64,
    pub n_octaves: usize,
    pub bins_per_octave: usize,
    /// Minimum clip length in samples.
    pub frame_length: usize,
    /// Scale every frame so its largest pitch class is 1.
    pub normalize: bool,
}

impl Default for ChromaParams {
    fn default() -> Self {
        Self {
            hop_length: 512,
            fmin: 32.703_195_662_574_83,
            n_octaves: 7,
            bins_per_octave: 12,
            frame_length: 2048,
            normalize: true,
        }
    }
}

struct Kernel {
    pitch_class: usize,
    // windowed quadrature pair, already divided by the window sum
    re: Vec<f64>,
    im: Vec<f64>,
}

fn pitch_class(freq: f64) -> usize {
    let semis = (12.0 * (freq / 440.0).log2()).round() as i64 + 9;
    semis.rem_euclid(12) as usize
}

fn kernels(params: &ChromaParams, sample_rate: f64) -> Result<Vec<Kernel>> {
    let bpo = params.bins_per_octave;
    if bpo == 0 || bpo % 12 != 0 || params.n_octaves == 0 || params.hop_length == 0 || !(params.fmin > 0.0) {
        return Err(Error::InvalidParameter(format!("chroma parameters {params:?}")));
    }
    let q = 1.0 / (2f64.powf(1.0 / bpo as f64) - 1.0);
    let n_bins = bpo * params.n_octaves;
    let top = params.fmin * 2f64.powf((n_bins - 1) as f64 / bpo as f64);
    if top >= sample_rate / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "highest constant-Q bin {top:.1} Hz exceeds Nyquist at {sample_rate} Hz"
        )));
    }

    Ok((0..n_bins)
        .map(|k| {
            let freq = params.fmin * 2f64.powf(k as f64 / bpo as f64);
            let len = (q * sample_rate / freq).ceil() as usize;
            let window: Vec<f64> = (0..len).map(|n| 0.5 - 0.5 * (2.0 * PI * (n as f64 + 0.5) / len as f64).cos()).collect();
            let norm: f64 = window.iter().sum();
            let omega = 2.0 * PI * freq / sample_rate;
            let centre = (len as f64 - 1.0) / 2.0;
            let (re, im) = window
                .iter()
                .enumerate()
                .map(|(n, w)| {
                    let phase = omega * (n as f64 - centre);
                    (w * phase.cos() / norm, -w * phase.sin() / norm)
                })
                .unzip();
            Kernel {
                pitch_class: pitch_class(freq),
                re,
                im,
            }
        })
        .collect())
}

/// Octave-folded constant-Q magnitudes, 12 × frames.
///
/// Frames are centred on multiples of the hop; samples outside the clip
/// count as zero. Silent frames stay all-zero.
pub fn compute_chromagram(clip: &AudioClip, params: &ChromaParams) -> Result<FeatureGram> {
    if clip.samples.len() < params.frame_length.max(1) {
        return Err(Error::ClipTooShort {
            samples: clip.samples.len(),
            needed: params.frame_length,
        });
    }
    let sr = clip.sample_rate as f64;
    let kernels = kernels(params, sr)?;
    let x: Vec<f64> = clip.samples.iter().map(|&s| s as f64).collect();
    let n_frames = 1 + x.len() / params.hop_length;

    let magnitudes: Vec<Vec<f64>> = kernels
        .par_iter()
        .map(|k| {
            let len = k.re.len() as isize;
            (0..n_frames)
                .map(|t| {
                    let start = (t * params.hop_length) as isize - len / 2;
                    let lo = (-start).max(0) as usize;
                    let hi = (x.len() as isize - start).clamp(0, len) as usize;
                    let (mut re, mut im) = (0.0, 0.0);
                    for n in lo..hi {
                        let s = x[(start + n as isize) as usize];
                        re += s * k.re[n];
                        im += s * k.im[n];
                    }
                    re.hypot(im)
                })
                .collect()
        })
        .collect();

    let mut chroma = Array2::<f64>::zeros((12, n_frames));
    for (k, mags) in kernels.iter().zip(&magnitudes) {
        let mut row = chroma.row_mut(k.pitch_class);
        for (c, m) in row.iter_mut().zip(mags) {
            *c += m;
        }
    }
    if params.normalize {
        for mut col in chroma.columns_mut() {
            let peak = col.fold(0.0f64, |a, &b| a.max(b));
            if peak > f64::MIN_POSITIVE {
                col.mapv_inplace(|v| v / peak);
            } else {
                col.fill(0.0);
            }
        }
    }

    Ok(FeatureGram {
        values: chroma,
        kind: GramKind::Chroma,
        hop_s: params.hop_length as f64 / sr,
    })
}
